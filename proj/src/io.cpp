#include "homog/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "homog/sha256.hpp"

namespace homog {

namespace {

std::string lower_ext(const std::string& path) {
    const std::size_t dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

double parse_double(const std::string& token, const char* context) {
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    // The whole token (minus surrounding blanks) must be consumed.
    while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
    if (end == begin || (end && *end != '\0')) {
        throw std::invalid_argument(std::string(context) + ": malformed number '" + token + "'");
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument("format_double: value is not finite");
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

BlockGrid read_grid_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Tolerate blank lines (e.g. a trailing newline).
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string token;
        while (std::getline(ss, token, ',')) {
            std::ostringstream ctx;
            ctx << "grid CSV line " << line_no;
            row.push_back(parse_double(token, ctx.str().c_str()));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            std::ostringstream msg;
            msg << "grid CSV line " << line_no << ": expected " << rows.front().size()
                << " values, got " << row.size();
            throw std::invalid_argument(msg.str());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::invalid_argument("grid CSV: no data rows");
    }
    const std::size_t m = rows.size(), n = rows.front().size();
    std::vector<double> d;
    d.reserve(m * n);
    for (const auto& row : rows) {
        d.insert(d.end(), row.begin(), row.end());
    }
    return new_uniform(m, n, d);
}

BlockGrid read_grid_json(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("grid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("x") || !doc.contains("y") || !doc.contains("D")) {
        throw std::invalid_argument("grid JSON: expected object with keys \"x\", \"y\", \"D\"");
    }
    BlockGrid g;
    try {
        g.x_breaks = doc.at("x").get<std::vector<double>>();
        g.y_breaks = doc.at("y").get<std::vector<double>>();
        const auto rows = doc.at("D").get<std::vector<std::vector<double>>>();
        g.m = g.y_breaks.size() < 1 ? 0 : g.y_breaks.size() - 1;
        g.n = g.x_breaks.size() < 1 ? 0 : g.x_breaks.size() - 1;
        if (rows.size() != g.m) {
            throw std::invalid_argument("grid JSON: D must have y-count minus one rows");
        }
        for (const auto& row : rows) {
            if (row.size() != g.n) {
                throw std::invalid_argument("grid JSON: ragged D rows");
            }
            g.D.insert(g.D.end(), row.begin(), row.end());
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("grid JSON: ") + e.what());
    }
    const std::vector<std::string> violations = validate(g);
    if (!violations.empty()) {
        throw std::invalid_argument("grid JSON: " + violations.front());
    }
    return g;
}

BlockGrid read_grid(const std::string& path) {
    const std::string ext = lower_ext(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open grid file: " + path);
    }
    if (ext == ".csv") return read_grid_csv(in);
    if (ext == ".json") return read_grid_json(in);
    throw std::invalid_argument("unsupported grid file extension (use .csv or .json): " + path);
}

void write_grid_csv(const BlockGrid& grid, std::ostream& out) {
    // The CSV format carries no geometry, so it can only express the
    // unit-square equal-block convention it implies on read.
    const double tol = 1e-12;
    bool representable = std::abs(grid.x0()) <= tol && std::abs(grid.xn() - 1.0) <= tol &&
                         std::abs(grid.y0()) <= tol && std::abs(grid.ym() - 1.0) <= tol;
    for (std::size_t j = 1; representable && j <= grid.n; ++j) {
        representable = std::abs(grid.l(j) - 1.0 / static_cast<double>(grid.n)) <= tol;
    }
    for (std::size_t i = 1; representable && i <= grid.m; ++i) {
        representable = std::abs(grid.h(i) - 1.0 / static_cast<double>(grid.m)) <= tol;
    }
    if (!representable) {
        throw std::invalid_argument(
            "grid CSV: only unit-square grids with equal blocks are representable; write JSON "
            "instead");
    }
    for (std::size_t i = 1; i <= grid.m; ++i) {
        for (std::size_t j = 1; j <= grid.n; ++j) {
            if (j > 1) out << ',';
            out << format_double(grid.d(i, j));
        }
        out << '\n';
    }
}

std::string canonical_grid_json(const BlockGrid& grid) {
    std::ostringstream out;
    out << "{\"x\":[";
    for (std::size_t j = 0; j < grid.x_breaks.size(); ++j) {
        if (j > 0) out << ',';
        out << format_double(grid.x_breaks[j]);
    }
    out << "],\"y\":[";
    for (std::size_t i = 0; i < grid.y_breaks.size(); ++i) {
        if (i > 0) out << ',';
        out << format_double(grid.y_breaks[i]);
    }
    out << "],\"D\":[";
    for (std::size_t i = 1; i <= grid.m; ++i) {
        if (i > 1) out << ',';
        out << '[';
        for (std::size_t j = 1; j <= grid.n; ++j) {
            if (j > 1) out << ',';
            out << format_double(grid.d(i, j));
        }
        out << ']';
    }
    out << "]}";
    return out.str();
}

void write_grid_json(const BlockGrid& grid, std::ostream& out) {
    out << canonical_grid_json(grid) << '\n';
}

void write_grid(const BlockGrid& grid, const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext != ".csv" && ext != ".json") {
        throw std::invalid_argument("unsupported grid file extension (use .csv or .json): " +
                                    path);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open output file: " + path);
    }
    if (ext == ".csv") {
        write_grid_csv(grid, out);
    } else {
        write_grid_json(grid, out);
    }
    out.flush();
    if (!out) {
        throw IoError("failed writing output file: " + path);
    }
}

std::string to_json(const ResultDocument& doc) {
    std::ostringstream out;
    out << "{\"method\":\"" << doc.method << "\",\"params\":{";
    for (std::size_t i = 0; i < doc.params.size(); ++i) {
        if (i > 0) out << ',';
        out << '"' << doc.params[i].first << "\":" << doc.params[i].second;
    }
    out << "},\"tensor\":[[" << format_double(doc.tensor.d11) << ','
        << format_double(doc.tensor.d12) << "],[" << format_double(doc.tensor.d21) << ','
        << format_double(doc.tensor.d22) << "]],\"eigenvalues\":["
        << format_double(doc.eigen.lambda1) << ',' << format_double(doc.eigen.lambda2)
        << "],\"angle_deg\":" << format_double(doc.eigen.angle_deg) << ",\"residual_norm\":{\"x\":"
        << format_double(doc.tensor.residual_norm_x) << ",\"y\":"
        << format_double(doc.tensor.residual_norm_y) << '}';
    if (doc.include_timing) {
        out << ",\"wall_time_s\":" << format_double(doc.tensor.wall_time_s);
    }
    out << ",\"grid_sha256\":\"" << doc.grid_sha256 << "\"}";
    return out.str();
}

std::string to_csv(const ResultDocument& doc) {
    std::ostringstream out;
    out << "method,params,d11,d12,d21,d22,lambda1,lambda2,angle_deg,residual_norm_x,"
           "residual_norm_y,";
    if (doc.include_timing) out << "wall_time_s,";
    out << "grid_sha256\n";
    out << doc.method << ',';
    for (std::size_t i = 0; i < doc.params.size(); ++i) {
        if (i > 0) out << ';';
        out << doc.params[i].first << '=' << doc.params[i].second;
    }
    out << ',' << format_double(doc.tensor.d11) << ',' << format_double(doc.tensor.d12) << ','
        << format_double(doc.tensor.d21) << ',' << format_double(doc.tensor.d22) << ','
        << format_double(doc.eigen.lambda1) << ',' << format_double(doc.eigen.lambda2) << ','
        << format_double(doc.eigen.angle_deg) << ',' << format_double(doc.tensor.residual_norm_x)
        << ',' << format_double(doc.tensor.residual_norm_y) << ',';
    if (doc.include_timing) out << format_double(doc.tensor.wall_time_s) << ',';
    out << doc.grid_sha256 << '\n';
    return out.str();
}

ResultDocument result_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("result JSON: ") + e.what());
    }
    ResultDocument doc;
    try {
        doc.method = j.at("method").get<std::string>();
        for (const auto& [key, value] : j.at("params").items()) {
            doc.params.emplace_back(key, value.get<std::size_t>());
        }
        doc.tensor.d11 = j.at("tensor").at(0).at(0).get<double>();
        doc.tensor.d12 = j.at("tensor").at(0).at(1).get<double>();
        doc.tensor.d21 = j.at("tensor").at(1).at(0).get<double>();
        doc.tensor.d22 = j.at("tensor").at(1).at(1).get<double>();
        doc.eigen.lambda1 = j.at("eigenvalues").at(0).get<double>();
        doc.eigen.lambda2 = j.at("eigenvalues").at(1).get<double>();
        doc.eigen.angle_deg = j.at("angle_deg").get<double>();
        doc.tensor.residual_norm_x = j.at("residual_norm").at("x").get<double>();
        doc.tensor.residual_norm_y = j.at("residual_norm").at("y").get<double>();
        doc.include_timing = j.contains("wall_time_s");
        if (doc.include_timing) {
            doc.tensor.wall_time_s = j.at("wall_time_s").get<double>();
        }
        doc.grid_sha256 = j.at("grid_sha256").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("result JSON: ") + e.what());
    }
    return doc;
}

void write_pgm(const BlockGrid& grid, std::ostream& out, std::size_t scale) {
    if (scale < 1) {
        throw std::invalid_argument("write_pgm: scale must be at least 1");
    }
    double max_d = 0.0;
    for (const double v : grid.D) max_d = std::max(max_d, v);
    const std::size_t width = grid.n * scale, height = grid.m * scale;
    out << "P5\n" << width << ' ' << height << "\n255\n";
    std::string row(width, '\0');
    for (std::size_t i = 1; i <= grid.m; ++i) {
        for (std::size_t j = 1; j <= grid.n; ++j) {
            const unsigned char gray =
                static_cast<unsigned char>(std::llround(255.0 * grid.d(i, j) / max_d));
            for (std::size_t s = 0; s < scale; ++s) {
                row[(j - 1) * scale + s] = static_cast<char>(gray);
            }
        }
        for (std::size_t s = 0; s < scale; ++s) {
            out.write(row.data(), static_cast<std::streamsize>(row.size()));
        }
    }
}

void write_pgm(const BlockGrid& grid, const std::string& path, std::size_t scale) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open output file: " + path);
    }
    write_pgm(grid, out, scale);
    out.flush();
    if (!out) {
        throw IoError("failed writing output file: " + path);
    }
}

}  // namespace homog

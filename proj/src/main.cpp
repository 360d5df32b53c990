// ============================================================================
// homog CLI
//
// Subcommands:
//   solve     - effective diffusivity tensor of a grid file (sa or fvm)
//   compare   - error-vs-resolution study against a fine finite-volume
//               benchmark
//   generate  - checkerboard / random-aggregate grid files
//   pixelate  - down-sample a fine binary grid
//   render    - grayscale PGM image of a grid
//
// Exit codes: 0 success, 1 validation error, 2 solver error, 3 I/O error.
// ============================================================================
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homog/analysis.hpp"
#include "homog/fvm_solver.hpp"
#include "homog/geometry.hpp"
#include "homog/grid.hpp"
#include "homog/io.hpp"
#include "homog/sa_solver.hpp"
#include "homog/sha256.hpp"

namespace {

using namespace homog;

void emit_text(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + out_path);
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing output file: " + out_path);
}

// Grid files default to CSV when the path has no extension.
void write_grid_auto(const BlockGrid& grid, const std::string& path) {
    const std::size_t dot = path.find_last_of('.');
    const bool has_ext = dot != std::string::npos && path.find('/', dot) == std::string::npos;
    if (!has_ext) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open output file: " + path);
        write_grid_csv(grid, out);
        out.flush();
        if (!out) throw IoError("failed writing output file: " + path);
        return;
    }
    write_grid(grid, path);
}

std::size_t parse_neig(const std::string& text, std::size_t nx, std::size_t ny) {
    if (text == "auto") return default_neig(nx, ny);
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0') {
        throw std::invalid_argument("--neig must be 'auto' or a non-negative integer, got '" +
                                    text + "'");
    }
    return static_cast<std::size_t>(v);
}

struct SolveOptions {
    std::string grid_path, method = "sa", neig = "auto", out_format = "json", output;
    std::size_t nx = 16, ny = 16, nf = 64;
    bool no_timing = false;
};

void run_solve(const SolveOptions& opt) {
    const BlockGrid grid = read_grid(opt.grid_path);
    ResultDocument doc;
    doc.grid_sha256 = sha256_hex(canonical_grid_json(grid));
    doc.include_timing = !opt.no_timing;
    if (opt.method == "sa") {
        const SolverParams params{opt.nx, opt.ny, parse_neig(opt.neig, opt.nx, opt.ny)};
        doc.tensor = sa_effective_tensor(grid, params);
        doc.method = "sa";
        doc.params = {{"neig", params.neig}, {"nx", params.nx}, {"ny", params.ny}};
    } else {
        doc.tensor = fvm_effective_tensor(grid, opt.nf, opt.nf);
        doc.method = "fvm";
        doc.params = {{"nfx", opt.nf}, {"nfy", opt.nf}};
    }
    // The document carries the raw tensor; the eigen summary is a derived
    // convenience, so decompose the symmetrized tensor rather than rejecting
    // coarse solves whose off-diagonals differ by truncation-level dust.
    EffectiveTensor symmetrized = doc.tensor;
    symmetrized.d12 = symmetrized.d21 = 0.5 * (doc.tensor.d12 + doc.tensor.d21);
    doc.eigen = principal_directions(symmetrized);
    const std::string text =
        (opt.out_format == "json") ? to_json(doc) + "\n" : to_csv(doc);
    emit_text(text, opt.output);
}

struct CompareOptions {
    std::string grid_path, output;
    std::vector<std::size_t> resolutions;
    std::size_t benchmark_nf = 1024;
};

void run_compare(const CompareOptions& opt) {
    const BlockGrid grid = read_grid(opt.grid_path);
    std::vector<std::size_t> res = opt.resolutions;
    if (res.empty()) res = {4, 8, 16, 32, 64};
    const ConvergenceStudy study = convergence_study(grid, res, opt.benchmark_nf);

    std::ostringstream out;
    out << "# benchmark nf=" << study.benchmark_nf << " tensor=[["
        << format_double(study.benchmark_tensor.d11) << ','
        << format_double(study.benchmark_tensor.d12) << "],["
        << format_double(study.benchmark_tensor.d21) << ','
        << format_double(study.benchmark_tensor.d22) << "]]\n";
    out << "nx,nf,sa_d11,sa_d12,sa_d21,sa_d22,fvm_d11,fvm_d12,fvm_d21,fvm_d22,"
           "sa_err11,sa_err12,sa_err21,sa_err22,fvm_err11,fvm_err12,fvm_err21,fvm_err22\n";
    for (const ConvergenceRow& row : study.rows) {
        out << row.nx << ',' << row.nf;
        const EffectiveTensor* tensors[2] = {&row.sa_tensor, &row.fvm_tensor};
        for (const EffectiveTensor* t : tensors) {
            out << ',' << format_double(t->d11) << ',' << format_double(t->d12) << ','
                << format_double(t->d21) << ',' << format_double(t->d22);
        }
        const ErrorReport* errors[2] = {&row.sa_error, &row.fvm_error};
        for (const ErrorReport* e : errors) {
            for (int r = 0; r < 2; ++r) {
                for (int c = 0; c < 2; ++c) {
                    out << ',' << format_double(e->e[r][c]);
                }
            }
        }
        out << '\n';
    }
    emit_text(out.str(), opt.output);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effective diffusivity tensors of periodic block-heterogeneous media"};
    app.require_subcommand(1);

    SolveOptions solve_opt;
    CLI::App* solve = app.add_subcommand("solve", "Compute the effective diffusivity tensor");
    solve->add_option("grid", solve_opt.grid_path, "grid file (.csv or .json)")->required();
    solve->add_option("--method", solve_opt.method, "solver: sa (semi-analytical) or fvm")
        ->check(CLI::IsMember({"sa", "fvm"}))
        ->capture_default_str();
    solve->add_option("--nx", solve_opt.nx, "abscissas per block in x (sa)")
        ->capture_default_str();
    solve->add_option("--ny", solve_opt.ny, "abscissas per block in y (sa)")
        ->capture_default_str();
    solve->add_option("--neig", solve_opt.neig, "series truncation order or 'auto' (sa)")
        ->capture_default_str();
    solve->add_option("--nf", solve_opt.nf, "nodes per direction (fvm)")->capture_default_str();
    solve->add_option("--out", solve_opt.out_format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    solve->add_option("--output", solve_opt.output, "write to this file instead of stdout");
    solve->add_flag("--no-timing", solve_opt.no_timing,
                    "omit wall_time_s so identical runs emit identical bytes");
    solve->callback([&] { run_solve(solve_opt); });

    CompareOptions cmp_opt;
    CLI::App* compare =
        app.add_subcommand("compare", "Error-vs-resolution study against an fvm benchmark");
    compare->add_option("grid", cmp_opt.grid_path, "grid file (.csv or .json)")->required();
    compare
        ->add_option("--resolutions", cmp_opt.resolutions,
                     "sa resolutions nx=ny (default 4,8,16,32,64)")
        ->delimiter(',');
    compare->add_option("--benchmark-nf", cmp_opt.benchmark_nf, "benchmark nodes per direction")
        ->capture_default_str();
    compare->add_option("--output", cmp_opt.output, "write to this file instead of stdout");
    compare->callback([&] { run_compare(cmp_opt); });

    CLI::App* generate = app.add_subcommand("generate", "Generate a test geometry");
    generate->require_subcommand(1);

    std::size_t gen_m = 8;
    double gen_low = 0.1, gen_high = 1.0;
    std::string gen_output;
    CLI::App* checker = generate->add_subcommand("checkerboard", "two-phase checkerboard");
    checker->add_option("--m", gen_m, "blocks per side")->required();
    checker->add_option("--low", gen_low, "low-phase diffusivity")->capture_default_str();
    checker->add_option("--high", gen_high, "high-phase diffusivity")->capture_default_str();
    checker->add_option("--output", gen_output, "output grid file")->required();
    checker->callback([&] { write_grid_auto(checkerboard(gen_m, gen_low, gen_high), gen_output); });

    AggregationConfig agg;
    std::string agg_output;
    CLI::App* aggregate = generate->add_subcommand("aggregate", "random aggregated medium");
    aggregate->add_option("--m", agg.m, "blocks per side (even)")->required();
    aggregate->add_option("--iters", agg.iterations, "smoothing iterations")
        ->capture_default_str();
    aggregate->add_option("--seed", agg.seed, "PRNG seed")->capture_default_str();
    aggregate->add_option("--low", agg.low, "low-phase diffusivity")->capture_default_str();
    aggregate->add_option("--high", agg.high, "high-phase diffusivity")->capture_default_str();
    aggregate->add_option("--output", agg_output, "output grid file")->required();
    aggregate->callback([&] { write_grid_auto(aggregate_random(agg), agg_output); });

    std::string pix_grid, pix_output;
    std::size_t pix_r = 0;
    double pix_threshold = 0.55;
    CLI::App* pixelate_cmd =
        app.add_subcommand("pixelate", "Down-sample a fine binary grid to r x r");
    pixelate_cmd->add_option("grid", pix_grid, "fine grid file (.csv or .json)")->required();
    pixelate_cmd->add_option("--r", pix_r, "coarse resolution (must divide the fine size)")
        ->required();
    pixelate_cmd->add_option("--threshold", pix_threshold, "patch-mean threshold for high phase")
        ->capture_default_str();
    pixelate_cmd->add_option("--output", pix_output, "output grid file")->required();
    pixelate_cmd->callback([&] {
        const BlockGrid fine = read_grid(pix_grid);
        double low = fine.D.front(), high = fine.D.front();
        for (const double v : fine.D) {
            if (v < low) low = v;
            if (v > high) high = v;
        }
        for (const double v : fine.D) {
            if (v != low && v != high) {
                throw std::invalid_argument("pixelate: grid has more than two distinct values");
            }
        }
        write_grid_auto(pixelate(fine, pix_r, low, high, pix_threshold), pix_output);
    });

    std::string render_grid, render_out;
    std::size_t render_scale = 1;
    CLI::App* render = app.add_subcommand("render", "Write a grayscale PGM image of a grid");
    render->add_option("grid", render_grid, "grid file (.csv or .json)")->required();
    render->add_option("--out", render_out, "output PGM path")->required();
    render->add_option("--scale", render_scale, "pixels per block side")->capture_default_str();
    render->callback([&] { write_pgm(read_grid(render_grid), render_out, render_scale); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::logic_error& e) {
        // invalid_argument, domain_error, out_of_range: validation problems.
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

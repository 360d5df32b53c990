#include "homog/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace homog {

namespace {

constexpr double kPi = 3.14159265358979323846;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Normalizes and fixes the sign convention: positive first component,
// positive second when the first vanishes.
std::array<double, 2> normalize_signed(double x, double y) {
    const double norm = std::hypot(x, y);
    x /= norm;
    y /= norm;
    if (x < 0.0 || (x == 0.0 && y < 0.0)) {
        x = -x;
        y = -y;
    }
    return {x, y};
}

double axis_angle_deg(const std::array<double, 2>& v) {
    return std::atan2(v[1], v[0]) * 180.0 / kPi;
}

}  // namespace

ErrorReport relative_error(const EffectiveTensor& d, const EffectiveTensor& d_ref, double atol) {
    const double val[2][2] = {{d.d11, d.d12}, {d.d21, d.d22}};
    const double ref[2][2] = {{d_ref.d11, d_ref.d12}, {d_ref.d21, d_ref.d22}};
    ErrorReport out;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            if (std::abs(ref[r][c]) < atol) {
                if (std::abs(val[r][c]) >= atol) {
                    std::ostringstream msg;
                    msg << "relative_error: reference entry (" << r + 1 << "," << c + 1
                        << ") is a structural zero but the compared value " << val[r][c]
                        << " is not";
                    throw std::domain_error(msg.str());
                }
                out.e[r][c] = 0.0;
                out.structural_zero[r][c] = true;
            } else {
                out.e[r][c] = std::abs((val[r][c] - ref[r][c]) / ref[r][c]);
            }
        }
    }
    return out;
}

PrincipalDecomposition principal_directions(const EffectiveTensor& tensor, double sym_tol) {
    const double scale = std::max({std::abs(tensor.d11), std::abs(tensor.d12),
                                   std::abs(tensor.d21), std::abs(tensor.d22)});
    if (std::abs(tensor.d12 - tensor.d21) > sym_tol * std::max(scale, 1e-300)) {
        std::ostringstream msg;
        msg << "principal_directions: tensor is asymmetric beyond tolerance (d12=" << tensor.d12
            << ", d21=" << tensor.d21 << ")";
        throw std::invalid_argument(msg.str());
    }
    const double a = tensor.d11;
    const double b = 0.5 * (tensor.d12 + tensor.d21);
    const double c = tensor.d22;
    const double mid = 0.5 * (a + c);
    const double disc = std::hypot(0.5 * (a - c), b);

    PrincipalDecomposition out;
    out.lambda1 = mid - disc;
    out.lambda2 = mid + disc;
    if (disc <= 1e-14 * std::max(std::abs(mid), 1e-300)) {
        // Isotropic: every direction is principal; use the Cartesian axes.
        out.v1 = {1.0, 0.0};
        out.v2 = {0.0, 1.0};
        out.angle_deg = 0.0;
        return out;
    }
    // Eigenvector of lambda1 from whichever row of (T - lambda1 I) is less
    // degenerate; the second eigenvector is its perpendicular.
    const double r1x = b, r1y = out.lambda1 - a;
    const double r2x = out.lambda1 - c, r2y = b;
    if (r1x * r1x + r1y * r1y >= r2x * r2x + r2y * r2y) {
        out.v1 = normalize_signed(r1x, r1y);
    } else {
        out.v1 = normalize_signed(r2x, r2y);
    }
    out.v2 = normalize_signed(-out.v1[1], out.v1[0]);

    // The principal axes are unoriented; report the axis angle closest to 0,
    // with the +45 choice on a tie.
    const double a1 = axis_angle_deg(out.v1);
    const double a2 = axis_angle_deg(out.v2);
    if (std::abs(a1) < std::abs(a2)) {
        out.angle_deg = a1;
    } else if (std::abs(a2) < std::abs(a1)) {
        out.angle_deg = a2;
    } else {
        out.angle_deg = std::max(a1, a2);
    }
    return out;
}

BenchmarkReport benchmark(const BlockGrid& grid, const SolverParams& sa_params, std::size_t nfx,
                          std::size_t nfy, std::size_t repeats) {
    if (repeats < 1) {
        throw std::invalid_argument("benchmark: repeats must be at least 1");
    }
    validate_params(grid, sa_params);

    BenchmarkReport report;
    report.repeats = repeats;
    const IndexMap map{grid.m, grid.n, sa_params.nx, sa_params.ny};
    report.sa_dimension = map.size();
    report.fvm_dimension = nfx * nfy;

    std::vector<double> sa_times, fvm_times;
    sa_times.reserve(repeats);
    fvm_times.reserve(repeats);
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        report.sa_tensor = sa_effective_tensor(grid, sa_params);
        sa_times.push_back(report.sa_tensor.wall_time_s);
    }
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        report.fvm_tensor = fvm_effective_tensor(grid, nfx, nfy);
        fvm_times.push_back(report.fvm_tensor.wall_time_s);
    }
    report.sa_median_s = median(sa_times);
    report.fvm_median_s = median(fvm_times);
    report.mutual_error = relative_error(report.sa_tensor, report.fvm_tensor);
    return report;
}

ConvergenceStudy convergence_study(const BlockGrid& grid,
                                   const std::vector<std::size_t>& resolutions,
                                   std::size_t benchmark_nf) {
    ConvergenceStudy study;
    study.benchmark_nf = benchmark_nf;
    study.benchmark_tensor = fvm_effective_tensor(grid, benchmark_nf, benchmark_nf);
    study.rows.reserve(resolutions.size());
    for (const std::size_t nx : resolutions) {
        ConvergenceRow row;
        row.nx = nx;
        row.nf = grid.n * nx;
        // The study runs each resolution at the longest admissible series
        // expansion (the window's upper bound) instead of the capped solver
        // default, so rows remain comparable across the whole sweep.
        const SolverParams params{nx, nx, 2 * nx - 3};
        row.sa_tensor = sa_effective_tensor(grid, params);
        row.fvm_tensor = fvm_effective_tensor(grid, grid.n * nx, grid.m * nx);
        row.sa_error = relative_error(row.sa_tensor, study.benchmark_tensor);
        row.fvm_error = relative_error(row.fvm_tensor, study.benchmark_tensor);
        study.rows.push_back(row);
    }
    return study;
}

}  // namespace homog

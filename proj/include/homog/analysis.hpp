// ============================================================================
// homog/analysis.hpp
//
// Error metrics, tensor diagnostics, and the benchmarking harness:
//   * relative_error      - entrywise relative error against a reference
//                           tensor, with masking of structural zeros;
//   * principal_directions - eigendecomposition of the (symmetrized) tensor
//                           into apparent diffusivities and the anticlockwise
//                           rotation angle of the principal axes;
//   * benchmark           - median-of-N wall times and system dimensions for
//                           the semi-analytical and finite-volume pipelines;
//   * convergence_study   - error-vs-resolution table against a fine
//                           finite-volume benchmark tensor.
// ============================================================================
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "homog/fvm_solver.hpp"
#include "homog/grid.hpp"
#include "homog/sa_solver.hpp"
#include "homog/tensor.hpp"

namespace homog {

struct ErrorReport {
    // e[r][c] = |(D - D_ref)[r][c] / D_ref[r][c]|, or 0 where masked.
    std::array<std::array<double, 2>, 2> e{};
    // True where both entries are structural zeros (|value| < atol) and the
    // quotient is reported as 0.
    std::array<std::array<bool, 2>, 2> structural_zero{};
};

// Entrywise relative error of `d` against the reference `d_ref`.  Entries
// where both tensors vanish (|.| < atol) are masked structural zeros that
// report error 0; a vanishing reference against a non-vanishing value is a
// domain error.
ErrorReport relative_error(const EffectiveTensor& d, const EffectiveTensor& d_ref,
                           double atol = 1e-12);

struct PrincipalDecomposition {
    double lambda1 = 0.0, lambda2 = 0.0;  // ascending: lambda1 <= lambda2
    std::array<double, 2> v1{}, v2{};     // orthonormal eigenvectors (v1 for lambda1)
    double angle_deg = 0.0;               // anticlockwise, in (-90, 90]
};

// Eigendecomposition of the symmetrized tensor.  Eigenvector signs are fixed
// by a positive first component (positive second when the first vanishes);
// the reported angle is the principal-axis angle closest to 0, with ties at
// +/-45 degrees resolving positive and the degenerate (isotropic) case
// reporting 0.  Throws std::invalid_argument when the tensor is asymmetric
// beyond sym_tol * max(|entries|).
PrincipalDecomposition principal_directions(const EffectiveTensor& tensor,
                                            double sym_tol = 1e-8);

struct BenchmarkReport {
    std::size_t sa_dimension = 0;   // mn(nx + ny + 1)
    std::size_t fvm_dimension = 0;  // nfx * nfy
    double sa_median_s = 0.0;
    double fvm_median_s = 0.0;
    EffectiveTensor sa_tensor, fvm_tensor;
    ErrorReport mutual_error;  // SA against FVM as reference
    std::size_t repeats = 0;
};

// Runs both pipelines `repeats` times each and reports median wall times,
// system dimensions, final tensors, and their mutual error.  Tensors are
// deterministic across repeats; only the timings vary.
BenchmarkReport benchmark(const BlockGrid& grid, const SolverParams& sa_params, std::size_t nfx,
                          std::size_t nfy, std::size_t repeats = 10);

struct ConvergenceRow {
    std::size_t nx = 0;  // semi-analytical resolution (nx = ny)
    std::size_t nf = 0;  // matched finite-volume node count per direction
    EffectiveTensor sa_tensor, fvm_tensor;
    ErrorReport sa_error, fvm_error;  // against the benchmark tensor
};

struct ConvergenceStudy {
    std::size_t benchmark_nf = 0;
    EffectiveTensor benchmark_tensor;
    std::vector<ConvergenceRow> rows;
};

// For each resolution N in `resolutions`: solve semi-analytically with
// nx = ny = N and neig = 2N - 3 (the admissibility window's upper bound, so
// rows stay comparable across the sweep) and by finite volumes at the
// matching spacing nf = n*N nodes in x and m*N in y, then measure both
// against the finite-volume benchmark at benchmark_nf x benchmark_nf nodes.
ConvergenceStudy convergence_study(const BlockGrid& grid,
                                   const std::vector<std::size_t>& resolutions,
                                   std::size_t benchmark_nf = 1024);

}  // namespace homog

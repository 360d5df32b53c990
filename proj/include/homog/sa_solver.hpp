// ============================================================================
// homog/sa_solver.hpp
//
// Semi-analytical interface-flux solver for the periodic cell problems of a
// block-heterogeneous unit cell.
//
// Each cell problem (xi in {x,y}) is recast per block via v = psi^(xi) + xi,
// so that v is harmonic inside every block.  The unknowns are the normal-flux
// functions on the block interfaces:
//     g_{(i-1)n+j}(y)  on the vertical interface x = x_{j-1} of block (i,j),
//     q_{(j-1)m+i}(x)  on the horizontal interface y = y_{i-1} of block (i,j),
// with wrap-around ids reusing g_{(i-1)n+1} / q_{(j-1)m+1} for the right /
// top edges of the last column / row (periodicity).  Inside block (i,j), v is
// the classical cosine/cosh series solution of the Neumann problem driven by
// those fluxes, plus a per-block constant K_{i,j}; the flux integrals are
// approximated by the composite midpoint rule, which turns every series
// coefficient into a linear combination of the flux values at the abscissas.
//
// Enforcing continuity of v at every interface abscissa (with periodic jumps
// of the linear part across the cell boundary), per-block zero-net-flux
// solvability (redundant on the last block), and an exact zero-mean condition
// on v - xi yields one square linear system A_S x_S = b_S of dimension
// N = mn(N_x + N_y + 1).  A_S is independent of xi; only b_S differs, so a
// single sparse LU factorization serves both cell problems.
//
// The series truncation order N_eig must satisfy
//     max(N_x, N_y) - 1  <=  N_eig  <=  2*min(N_x, N_y) - 3
// (full rank below, midpoint-rule aliasing above), which also forces
// N_x, N_y >= 2.
// ============================================================================
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Sparse>

#include "homog/block_lu.hpp"
#include "homog/grid.hpp"
#include "homog/quadrature.hpp"
#include "homog/tensor.hpp"

namespace homog {

enum class Axis { x, y };

struct SolverParams {
    std::size_t nx = 0;    // abscissas per horizontal span of a block (x direction)
    std::size_t ny = 0;    // abscissas per vertical span of a block (y direction)
    std::size_t neig = 0;  // series truncation order
};

// min(2*min(nx,ny)-3, 100), raised to the lower bound max(nx,ny)-1 when the
// cap would fall below it.  Throws std::invalid_argument when the feasibility
// window is empty.
std::size_t default_neig(std::size_t nx, std::size_t ny);

// Throws std::invalid_argument when params violate the truncation window or
// the grid is invalid.
void validate_params(const BlockGrid& grid, const SolverParams& params);

// Positions of the unknowns inside x_S: all g samples, then all q samples,
// then the constants K_{i,j} row-major.  Function ids f and sample indices p
// are 1-based as in the mathematical statement.
struct IndexMap {
    std::size_t m = 0, n = 0, nx = 0, ny = 0;

    std::size_t g_col(std::size_t f, std::size_t p) const { return (f - 1) * ny + (p - 1); }
    std::size_t q_col(std::size_t f, std::size_t p) const {
        return m * n * ny + (f - 1) * nx + (p - 1);
    }
    std::size_t k_col(std::size_t i, std::size_t j) const {
        return m * n * (nx + ny) + (i - 1) * n + (j - 1);
    }
    std::size_t size() const { return m * n * (nx + ny + 1); }

    // Interface ids of the four edges of block (i,j), with periodic wrap.
    std::size_t l_id(std::size_t i, std::size_t j) const { return (i - 1) * n + j; }
    std::size_t r_id(std::size_t i, std::size_t j) const {
        return j < n ? (i - 1) * n + j + 1 : (i - 1) * n + 1;
    }
    std::size_t b_id(std::size_t i, std::size_t j) const { return (j - 1) * m + i; }
    std::size_t t_id(std::size_t i, std::size_t j) const {
        return i < m ? (j - 1) * m + i + 1 : (j - 1) * m + 1;
    }
};

// A_S (xi-independent) with both right-hand sides.
struct AssembledSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b_x, b_y;
    IndexMap map;
    SolverParams params;
};

// use_cache enables the same-size-block fast path (series sums computed once
// per distinct block size).  Results are bit-identical with the cache on or
// off; the flag exists so tests can assert exactly that.
AssembledSystem assemble_system(const BlockGrid& grid, const SolverParams& params,
                                bool use_cache = true);

// Unpacked solution of one cell problem.
struct InterfaceSolution {
    Axis axis = Axis::x;
    std::vector<std::vector<double>> g_vals;  // [f-1][p-1], f = 1..mn, p = 1..ny
    std::vector<std::vector<double>> q_vals;  // [f-1][p-1], f = 1..mn, p = 1..nx
    std::vector<double> K;                    // row-major m*n
    double k(std::size_t i, std::size_t j) const { return K[(i - 1) * n_cols + (j - 1)]; }
    std::size_t n_cols = 0;
};

struct SaSolution {
    InterfaceSolution sol_x, sol_y;
    double residual_norm_x = 0.0, residual_norm_y = 0.0;
};

// Supernode layout of A_S for the structured block LU (see block_lu.hpp):
// block (i,j) owns the g samples of its right edge, the q samples of its top
// edge, and K_{i,j} as columns, and the continuity rows of those same edges
// plus its flux-balance row (the global zero-mean row for the last block,
// whose flux row is the one skipped) as rows.  Every supernode is then square
// with dim = nx + ny + 1, and supernodes couple only king-graph style on the
// periodic m-by-n block lattice.  Elimination order: torus_dissection_order.
// Exposed for tests.
BlockLayout sa_block_layout(const IndexMap& map);

// One factorization, two right-hand sides.  Uses the structured block LU and
// falls back to a general sparse LU if the block elimination hits a singular
// diagonal block or leaves a suspicious residual.  Throws std::runtime_error
// (mentioning the truncation window) if the fallback factorization also
// reports a singular matrix.
SaSolution solve_system(const AssembledSystem& system, const BlockGrid& grid);

// Evaluates the truncated series solution v at a point, reconstructing the
// block's series coefficients from the interface-flux values.  The _in_block
// variant forces the block (useful on shared interfaces, where v is evaluated
// once from each side); the plain variant locates the block from the point.
double evaluate_v_in_block(const InterfaceSolution& sol, const BlockGrid& grid,
                           const SolverParams& params, std::size_t i, std::size_t j, double x,
                           double y);
double evaluate_v(const InterfaceSolution& sol, const BlockGrid& grid, const SolverParams& params,
                  double x, double y);

// psi = v - xi-coordinate.
double evaluate_psi(const InterfaceSolution& sol, const BlockGrid& grid,
                    const SolverParams& params, double x, double y);

// Effective tensor by exact block-wise integration of D * grad v for the two
// solved cell problems.
EffectiveTensor effective_tensor(const SaSolution& solution, const BlockGrid& grid,
                                 const SolverParams& params);

// Full pipeline: assemble, factorize, solve both problems, integrate.  Fills
// residual norms and wall_time_s.
EffectiveTensor sa_effective_tensor(const BlockGrid& grid, const SolverParams& params,
                                    bool use_cache = true);

// Pipeline without the tensor step, for tests that inspect the fields.
SaSolution sa_solve(const BlockGrid& grid, const SolverParams& params, bool use_cache = true);

// Overflow-safe cosh(alpha)/sinh(beta) for |alpha| <= beta; used by both the
// assembler and the evaluator (exposed for tests).
double cosh_over_sinh(double alpha, double beta);

}  // namespace homog

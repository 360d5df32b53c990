// ============================================================================
// homog/fvm_solver.hpp
//
// Vertex-centered finite volume benchmark solver for the periodic cell
// problems
//
//     div( D(x,y) ( grad psi^(xi) + e_xi ) ) = 0   on the unit cell,
//     psi^(xi) periodic, one nodal value pinned to fix the additive constant,
//
// for xi in {x, y}.  Uniformly spaced nodes are chosen so that every block
// interface coincides with a node line; the control volume around a node is
// bounded by eight half-edges, each lying strictly inside a single block, so
// the diffusivity at a half-edge midpoint is always unambiguous.  Fluxes use
// second-order central differences; the Kronecker-delta forcing moves to the
// right-hand side.  The assembled (negated) system is symmetric positive
// semidefinite with a constant null space; pinning one node yields an SPD
// reduced system solved by a sparse LDL^T factorization, reused for both
// right-hand sides.
//
// The effective tensor integrates D * (grad psi + e_xi) with the gradient of
// the bilinear interpolant of psi evaluated at element centroids.
// ============================================================================
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "homog/grid.hpp"
#include "homog/tensor.hpp"

namespace homog {

// Periodic structured node set: nodes at (x_0 + p h_x, y_0 + q h_y) for
// p = 0..nfx-1, q = 0..nfy-1; index p + q*nfx.  Node nfx is identified with
// node 0 (and likewise in y).
struct FvmMesh {
    std::size_t nfx = 0, nfy = 0;
    double hx = 0.0, hy = 0.0;
    double x0 = 0.0, y0 = 0.0;
    std::size_t node_count() const { return nfx * nfy; }
    std::size_t node_index(std::size_t p, std::size_t q) const { return q * nfx + p; }
};

// Validates that every interior block interface coincides with a node line;
// throws std::invalid_argument naming the first offending interface.
FvmMesh build_mesh(const BlockGrid& grid, std::size_t nfx, std::size_t nfy);

// Reduced linear system with the gauge node's row and column removed.  The
// matrix is identical for both cell problems; only the right-hand sides
// differ, so one factorization serves both.
struct FvmSystem {
    Eigen::SparseMatrix<double> A;  // SPD, dimension node_count()-1
    Eigen::VectorXd b_x, b_y;
    std::size_t gauge_node = 0;     // pinned node (psi = 0)
};

FvmSystem assemble_fvm(const FvmMesh& mesh, const BlockGrid& grid, std::size_t gauge_node = 0);

// Nodal corrector values on the periodic node set (gauge node exactly 0).
struct FvmField {
    std::vector<double> psi;  // size nfx*nfy
};

struct FvmSolveResult {
    FvmField field_x, field_y;
    double residual_norm_x = 0.0, residual_norm_y = 0.0;
};

// Sparse LDL^T; throws std::runtime_error if the factorization fails.
FvmSolveResult solve_fvm(const FvmSystem& system, const FvmMesh& mesh);

EffectiveTensor effective_tensor_fvm(const FvmField& field_x, const FvmField& field_y,
                                     const FvmMesh& mesh, const BlockGrid& grid);

// Full pipeline: build, assemble, factorize, solve both problems, integrate.
// Fills residual norms and wall_time_s.
EffectiveTensor fvm_effective_tensor(const BlockGrid& grid, std::size_t nfx, std::size_t nfy);

}  // namespace homog

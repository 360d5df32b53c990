// ============================================================================
// homog/block_lu.hpp
//
// Structured block LU factorization for sparse systems whose rows and columns
// fall into equal-size groups ("supernodes") with a known good elimination
// order.  The factor is stored as dense s-by-s blocks and the elimination
// runs entirely on small dense matrix products, which beats a general sparse
// LU by a wide margin when s is moderate and the supernode coupling graph is
// local -- exactly the shape of the interface-flux system, where each grid
// block contributes the fluxes on its right and top edges plus its own
// constant (s = nx + ny + 1) and couples only to its lattice neighbours.
//
// The code here is independent of that application: it needs only a
// BlockLayout assigning every matrix row and every matrix column to one
// (supernode, slot) pair, with supernodes numbered in elimination order.
// Pivoting happens inside the diagonal blocks only; if a diagonal block
// turns out singular the factorization flags failure and the caller is
// expected to fall back to a general sparse solver.
// ============================================================================
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace homog {

// Assignment of matrix rows/columns to supernodes.  Every row and every
// column belongs to exactly one supernode, at a fixed slot in [0, dim); the
// supernode index is its elimination position.  A layout is valid when both
// assignments are bijections onto {0..count-1} x {0..dim-1}; factorization
// checks this and refuses invalid layouts.
struct BlockLayout {
    int dim = 0;    // rows (= columns) per supernode
    int count = 0;  // number of supernodes

    // per matrix row / column: owning supernode and slot inside it
    std::vector<int> row_node, row_slot;
    std::vector<int> col_node, col_slot;
};

// Block LU factor.  blocks[] holds the dense tiles (diagonal tiles carry the
// U diagonal, off-diagonal tiles L_ik = A_ik * A_kk^{-1} below and the
// updated A_kj above); upper[k] / lower[k] list the nonzero tiles of row k /
// column k beyond the diagonal, in creation order.
struct BlockLuFactor {
    BlockLayout layout;
    std::vector<Eigen::MatrixXd> blocks;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> diag;    // of A_kk
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> diag_t;  // of A_kk^T, for L_ik
    std::vector<std::vector<std::pair<int, int>>> upper;       // (j > k, block index)
    std::vector<std::vector<std::pair<int, int>>> lower;       // (i > k, block index)
    bool ok = false;  // false: invalid layout or singular diagonal block
};

// Right-looking block elimination in the order the layout prescribes.  Fill
// tiles are materialized on demand.  Never throws on singular input; check
// .ok before calling block_lu_solve.
BlockLuFactor block_lu_factorize(const Eigen::SparseMatrix<double>& A, BlockLayout layout);

// Forward/backward substitution through the block factor.  Requires f.ok.
Eigen::VectorXd block_lu_solve(const BlockLuFactor& f, const Eigen::VectorXd& b);

// Elimination order for supernodes coupled like king-graph neighbours on a
// periodic rows-by-cols lattice: the interior (everything off the wrap ring)
// is ordered by recursive bisection, then the wrap ring -- last column, then
// last row -- is eliminated at the end, where its dense coupling does the
// least damage.  Returns all rows*cols cells exactly once, ending at
// (rows-1, cols-1).
std::vector<std::pair<std::size_t, std::size_t>> torus_dissection_order(std::size_t rows,
                                                                        std::size_t cols);

}  // namespace homog

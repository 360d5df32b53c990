#include "homog/block_lu.hpp"

#include <unordered_map>

namespace homog {

namespace {

// Recursive bisection of the rectangle [r0,r1) x [c0,c1): both halves first,
// then the separator line, so the separator is eliminated after everything
// it splits.  Small patches are emitted directly.
void bisect(std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1,
            std::vector<std::pair<std::size_t, std::size_t>>& order) {
    const std::size_t rows = r1 - r0, cols = c1 - c0;
    if (rows == 0 || cols == 0) return;
    if (rows <= 2 && cols <= 2) {
        for (std::size_t r = r0; r < r1; ++r)
            for (std::size_t c = c0; c < c1; ++c) order.emplace_back(r, c);
        return;
    }
    if (rows >= cols) {
        const std::size_t rs = r0 + rows / 2;
        bisect(r0, rs, c0, c1, order);
        bisect(rs + 1, r1, c0, c1, order);
        for (std::size_t c = c0; c < c1; ++c) order.emplace_back(rs, c);
    } else {
        const std::size_t cs = c0 + cols / 2;
        bisect(r0, r1, c0, cs, order);
        bisect(r0, r1, cs + 1, c1, order);
        for (std::size_t r = r0; r < r1; ++r) order.emplace_back(r, cs);
    }
}

// A layout is usable only if rows and columns are both bijections onto
// (node, slot) pairs; anything else would scatter entries on top of each
// other or leave holes in the substitution sweeps.
bool layout_is_bijective(const std::vector<int>& node, const std::vector<int>& slot,
                         std::size_t size, int count, int dim) {
    if (node.size() != size || slot.size() != size) return false;
    std::vector<char> seen(size, 0);
    for (std::size_t q = 0; q < size; ++q) {
        if (node[q] < 0 || node[q] >= count || slot[q] < 0 || slot[q] >= dim) return false;
        const std::size_t cell = static_cast<std::size_t>(node[q]) * static_cast<std::size_t>(dim) +
                                 static_cast<std::size_t>(slot[q]);
        if (seen[cell]) return false;
        seen[cell] = 1;
    }
    return true;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> torus_dissection_order(std::size_t rows,
                                                                        std::size_t cols) {
    std::vector<std::pair<std::size_t, std::size_t>> order;
    order.reserve(rows * cols);
    if (rows >= 2 && cols >= 2) {
        bisect(0, rows - 1, 0, cols - 1, order);
        for (std::size_t r = 0; r + 1 < rows; ++r) order.emplace_back(r, cols - 1);
        for (std::size_t c = 0; c < cols; ++c) order.emplace_back(rows - 1, c);
    } else {
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) order.emplace_back(r, c);
    }
    return order;
}

BlockLuFactor block_lu_factorize(const Eigen::SparseMatrix<double>& A, BlockLayout layout) {
    BlockLuFactor f;
    f.layout = std::move(layout);
    const int S = f.layout.count, s = f.layout.dim;
    const std::size_t size = static_cast<std::size_t>(S) * static_cast<std::size_t>(s);
    if (S <= 0 || s <= 0 || A.rows() != A.cols() ||
        static_cast<std::size_t>(A.rows()) != size ||
        !layout_is_bijective(f.layout.row_node, f.layout.row_slot, size, S, s) ||
        !layout_is_bijective(f.layout.col_node, f.layout.col_slot, size, S, s)) {
        return f;
    }

    // tile lookup: at[i][j] -> index into f.blocks (created zeroed on demand)
    std::vector<std::unordered_map<int, int>> at(static_cast<std::size_t>(S));
    f.upper.assign(static_cast<std::size_t>(S), {});
    f.lower.assign(static_cast<std::size_t>(S), {});
    const auto tile = [&](int i, int j) -> Eigen::MatrixXd& {
        auto [it, fresh] = at[static_cast<std::size_t>(i)].try_emplace(j, -1);
        if (fresh) {
            it->second = static_cast<int>(f.blocks.size());
            f.blocks.emplace_back(Eigen::MatrixXd::Zero(s, s));
            if (j > i) f.upper[static_cast<std::size_t>(i)].emplace_back(j, it->second);
            if (i > j) f.lower[static_cast<std::size_t>(j)].emplace_back(i, it->second);
        }
        return f.blocks[static_cast<std::size_t>(it->second)];
    };

    for (int c = 0; c < A.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) {
            const std::size_t r = static_cast<std::size_t>(it.row());
            tile(f.layout.row_node[r], f.layout.col_node[static_cast<std::size_t>(c)])(
                f.layout.row_slot[r], f.layout.col_slot[static_cast<std::size_t>(c)]) = it.value();
        }
    }

    f.diag.reserve(static_cast<std::size_t>(S));
    f.diag_t.reserve(static_cast<std::size_t>(S));
    for (int k = 0; k < S; ++k) {
        const Eigen::MatrixXd& Akk = tile(k, k);
        f.diag.emplace_back(Akk);
        f.diag_t.emplace_back(Akk.transpose());
        if (!(f.diag.back().matrixLU().diagonal().cwiseAbs().minCoeff() > 0.0)) return f;
        // L_ik = A_ik A_kk^{-1}, computed as the solution of A_kk^T L_ik^T = A_ik^T
        for (auto& [i, bi] : f.lower[static_cast<std::size_t>(k)]) {
            Eigen::MatrixXd& Aik = f.blocks[static_cast<std::size_t>(bi)];
            Aik = f.diag_t[static_cast<std::size_t>(k)].solve(Aik.transpose()).transpose();
        }
        // Schur update A_ij -= L_ik A_kj.  Materialize every fill tile before
        // taking references: tile() may grow f.blocks and reallocate.
        for (auto& [j, bj] : f.upper[static_cast<std::size_t>(k)])
            for (auto& [i, bi] : f.lower[static_cast<std::size_t>(k)]) tile(i, j);
        for (auto& [j, bj] : f.upper[static_cast<std::size_t>(k)]) {
            const Eigen::MatrixXd& Akj = f.blocks[static_cast<std::size_t>(bj)];
            for (auto& [i, bi] : f.lower[static_cast<std::size_t>(k)]) {
                tile(i, j).noalias() -= f.blocks[static_cast<std::size_t>(bi)] * Akj;
            }
        }
    }
    f.ok = true;
    return f;
}

Eigen::VectorXd block_lu_solve(const BlockLuFactor& f, const Eigen::VectorXd& b) {
    const int S = f.layout.count, s = f.layout.dim;
    // column k holds supernode k's segment; the row layout is a bijection, so
    // the scatter fills Y completely
    Eigen::MatrixXd Y(s, S);
    for (Eigen::Index q = 0; q < b.size(); ++q) {
        Y(f.layout.row_slot[static_cast<std::size_t>(q)],
          f.layout.row_node[static_cast<std::size_t>(q)]) = b[q];
    }
    for (int k = 0; k < S; ++k) {
        for (const auto& [i, bi] : f.lower[static_cast<std::size_t>(k)])
            Y.col(i).noalias() -= f.blocks[static_cast<std::size_t>(bi)] * Y.col(k);
    }
    for (int k = S - 1; k >= 0; --k) {
        for (const auto& [j, bj] : f.upper[static_cast<std::size_t>(k)])
            Y.col(k).noalias() -= f.blocks[static_cast<std::size_t>(bj)] * Y.col(j);
        Y.col(k) = f.diag[static_cast<std::size_t>(k)].solve(Y.col(k));
    }
    Eigen::VectorXd x(b.size());
    for (Eigen::Index q = 0; q < b.size(); ++q) {
        x[q] = Y(f.layout.col_slot[static_cast<std::size_t>(q)],
                 f.layout.col_node[static_cast<std::size_t>(q)]);
    }
    return x;
}

}  // namespace homog

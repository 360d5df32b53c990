#include "homog/fvm_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace homog {

namespace {

// Interval index (0-based) of coordinate c within the breakpoints, for a
// coordinate known to lie strictly inside the domain and away from breaks.
std::size_t interval_index(const std::vector<double>& breaks, double c) {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), c);
    std::size_t k = static_cast<std::size_t>(it - breaks.begin());
    if (k == 0) k = 1;
    if (k > breaks.size() - 1) k = breaks.size() - 1;
    return k - 1;
}

// Wraps c into [lo, lo+len).
double wrap(double c, double lo, double len) {
    double t = c - lo;
    t -= std::floor(t / len) * len;
    return lo + t;
}

// Precomputed 0-based block row/column indices for a family of sample
// coordinates, periodically wrapped.
std::vector<std::size_t> sample_intervals(const std::vector<double>& breaks, double lo,
                                          double len, double first, double step,
                                          std::size_t count) {
    std::vector<std::size_t> idx(count);
    for (std::size_t k = 0; k < count; ++k)
        idx[k] = interval_index(breaks, wrap(first + static_cast<double>(k) * step, lo, len));
    return idx;
}

}  // namespace

FvmMesh build_mesh(const BlockGrid& grid, std::size_t nfx, std::size_t nfy) {
    if (nfx < 2 || nfy < 2) throw std::invalid_argument("build_mesh: need at least 2 nodes per direction");
    FvmMesh mesh;
    mesh.nfx = nfx;
    mesh.nfy = nfy;
    mesh.x0 = grid.x0();
    mesh.y0 = grid.y0();
    mesh.hx = grid.width() / static_cast<double>(nfx);
    mesh.hy = grid.height() / static_cast<double>(nfy);

    auto check_alignment = [](const std::vector<double>& breaks, double lo, double spacing,
                              std::size_t count, char axis) {
        for (std::size_t k = 1; k + 1 < breaks.size(); ++k) {
            const double t = (breaks[k] - lo) / spacing;
            if (std::abs(t - std::round(t)) > 1e-9 || std::round(t) <= 0.0 ||
                std::round(t) >= static_cast<double>(count)) {
                std::ostringstream oss;
                oss << "build_mesh: block interface " << axis << " = " << breaks[k]
                    << " does not coincide with a node (spacing " << spacing << ")";
                throw std::invalid_argument(oss.str());
            }
        }
    };
    check_alignment(grid.x_breaks, mesh.x0, mesh.hx, nfx, 'x');
    check_alignment(grid.y_breaks, mesh.y0, mesh.hy, nfy, 'y');
    return mesh;
}

FvmSystem assemble_fvm(const FvmMesh& mesh, const BlockGrid& grid, std::size_t gauge_node) {
    const std::size_t nfx = mesh.nfx, nfy = mesh.nfy;
    const std::size_t total = mesh.node_count();
    if (gauge_node >= total) throw std::invalid_argument("assemble_fvm: gauge node out of range");

    const double hx = mesh.hx, hy = mesh.hy;
    const double W = grid.width(), H = grid.height();

    // Block indices for every sample family (all points strictly inside blocks).
    // Vertical faces sit at x_0 + (p+1/2)h_x; their two half-edge midpoints are
    // offset by -h_y/4 and +h_y/4 from the node row.  Horizontal faces mirror this.
    const auto col_face = sample_intervals(grid.x_breaks, grid.x0(), W, mesh.x0 + 0.5 * hx, hx, nfx);
    const auto row_qminus = sample_intervals(grid.y_breaks, grid.y0(), H, mesh.y0 - 0.25 * hy, hy, nfy);
    const auto row_qplus = sample_intervals(grid.y_breaks, grid.y0(), H, mesh.y0 + 0.25 * hy, hy, nfy);
    const auto row_face = sample_intervals(grid.y_breaks, grid.y0(), H, mesh.y0 + 0.5 * hy, hy, nfy);
    const auto col_pminus = sample_intervals(grid.x_breaks, grid.x0(), W, mesh.x0 - 0.25 * hx, hx, nfx);
    const auto col_pplus = sample_intervals(grid.x_breaks, grid.x0(), W, mesh.x0 + 0.25 * hx, hx, nfx);

    auto dval = [&grid](std::size_t i0, std::size_t j0) {
        return grid.D[i0 * grid.n + j0];
    };

    // D sums over the two half-edges of each face.
    // dsum_e[p][q]: vertical face between node columns p and p+1 at node row q.
    auto dsum_vertical = [&](std::size_t p, std::size_t q) {
        return dval(row_qminus[q], col_face[p]) + dval(row_qplus[q], col_face[p]);
    };
    // horizontal face between node rows q and q+1 at node column p.
    auto dsum_horizontal = [&](std::size_t p, std::size_t q) {
        return dval(row_face[q], col_pminus[p]) + dval(row_face[q], col_pplus[p]);
    };

    const auto reduced = [gauge_node](std::size_t idx) -> std::ptrdiff_t {
        if (idx == gauge_node) return -1;
        return static_cast<std::ptrdiff_t>(idx > gauge_node ? idx - 1 : idx);
    };

    FvmSystem system;
    system.gauge_node = gauge_node;
    const std::size_t dim = total - 1;
    system.b_x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    system.b_y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(5 * total);

    for (std::size_t q = 0; q < nfy; ++q) {
        const std::size_t qs = (q + nfy - 1) % nfy;
        const std::size_t qn = (q + 1) % nfy;
        for (std::size_t p = 0; p < nfx; ++p) {
            const std::size_t pw = (p + nfx - 1) % nfx;
            const std::size_t pe = (p + 1) % nfx;
            const std::size_t node = mesh.node_index(p, q);

            const double de = dsum_vertical(p, q);    // east face of this node
            const double dw = dsum_vertical(pw, q);   // west face
            const double dn = dsum_horizontal(p, q);  // north face
            const double ds = dsum_horizontal(p, qs); // south face

            const double te = 0.5 * hy / hx * de;
            const double tw = 0.5 * hy / hx * dw;
            const double tn = 0.5 * hx / hy * dn;
            const double ts = 0.5 * hx / hy * ds;

            const std::ptrdiff_t r = reduced(node);
            if (r < 0) continue;  // gauge row dropped; psi at the gauge node is 0

            triplets.emplace_back(r, r, te + tw + tn + ts);
            const std::ptrdiff_t ce = reduced(mesh.node_index(pe, q));
            const std::ptrdiff_t cw = reduced(mesh.node_index(pw, q));
            const std::ptrdiff_t cn = reduced(mesh.node_index(p, qn));
            const std::ptrdiff_t cs = reduced(mesh.node_index(p, qs));
            if (ce >= 0) triplets.emplace_back(r, ce, -te);
            if (cw >= 0) triplets.emplace_back(r, cw, -tw);
            if (cn >= 0) triplets.emplace_back(r, cn, -tn);
            if (cs >= 0) triplets.emplace_back(r, cs, -ts);

            system.b_x[r] = 0.5 * hy * (de - dw);
            system.b_y[r] = 0.5 * hx * (dn - ds);
        }
    }

    system.A.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    system.A.setFromTriplets(triplets.begin(), triplets.end());
    system.A.makeCompressed();
    return system;
}

FvmSolveResult solve_fvm(const FvmSystem& system, const FvmMesh& mesh) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(system.A);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("solve_fvm: LDL^T factorization failed");

    const Eigen::VectorXd x = ldlt.solve(system.b_x);
    const Eigen::VectorXd y = ldlt.solve(system.b_y);

    FvmSolveResult result;
    result.residual_norm_x = (system.A * x - system.b_x).norm();
    result.residual_norm_y = (system.A * y - system.b_y).norm();

    auto unpack = [&](const Eigen::VectorXd& sol) {
        FvmField field;
        field.psi.assign(mesh.node_count(), 0.0);
        std::size_t r = 0;
        for (std::size_t node = 0; node < mesh.node_count(); ++node) {
            if (node == system.gauge_node) continue;
            field.psi[node] = sol[static_cast<Eigen::Index>(r++)];
        }
        return field;
    };
    result.field_x = unpack(x);
    result.field_y = unpack(y);
    return result;
}

EffectiveTensor effective_tensor_fvm(const FvmField& field_x, const FvmField& field_y,
                                     const FvmMesh& mesh, const BlockGrid& grid) {
    const std::size_t nfx = mesh.nfx, nfy = mesh.nfy;
    const double hx = mesh.hx, hy = mesh.hy;

    // Block indices of element centroids (x_0 + (p+1/2)h_x, y_0 + (q+1/2)h_y).
    const auto col_c = sample_intervals(grid.x_breaks, grid.x0(), grid.width(),
                                        mesh.x0 + 0.5 * hx, hx, nfx);
    const auto row_c = sample_intervals(grid.y_breaks, grid.y0(), grid.height(),
                                        mesh.y0 + 0.5 * hy, hy, nfy);

    double sum[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // sum[r][c], c = 0 for xi=x
    for (std::size_t q = 0; q < nfy; ++q) {
        const std::size_t qn = (q + 1) % nfy;
        for (std::size_t p = 0; p < nfx; ++p) {
            const std::size_t pe = (p + 1) % nfx;
            const double dc = grid.D[row_c[q] * grid.n + col_c[p]];

            const std::size_t i00 = mesh.node_index(p, q), i10 = mesh.node_index(pe, q);
            const std::size_t i01 = mesh.node_index(p, qn), i11 = mesh.node_index(pe, qn);

            // Bilinear-interpolant gradient at the element centroid.
            auto accumulate = [&](const std::vector<double>& psi, std::size_t col) {
                const double dpdx =
                    (psi[i10] + psi[i11] - psi[i00] - psi[i01]) / (2.0 * hx);
                const double dpdy =
                    (psi[i01] + psi[i11] - psi[i00] - psi[i10]) / (2.0 * hy);
                const double ex = (col == 0) ? 1.0 : 0.0;
                const double ey = (col == 0) ? 0.0 : 1.0;
                sum[0][col] += dc * (dpdx + ex);
                sum[1][col] += dc * (dpdy + ey);
            };
            accumulate(field_x.psi, 0);
            accumulate(field_y.psi, 1);
        }
    }

    const double scale = hx * hy / grid.area();
    EffectiveTensor tensor;
    tensor.d11 = scale * sum[0][0];
    tensor.d21 = scale * sum[1][0];
    tensor.d12 = scale * sum[0][1];
    tensor.d22 = scale * sum[1][1];
    return tensor;
}

EffectiveTensor fvm_effective_tensor(const BlockGrid& grid, std::size_t nfx, std::size_t nfy) {
    const auto start = std::chrono::steady_clock::now();
    const FvmMesh mesh = build_mesh(grid, nfx, nfy);
    const FvmSystem system = assemble_fvm(mesh, grid);
    const FvmSolveResult solved = solve_fvm(system, mesh);
    EffectiveTensor tensor = effective_tensor_fvm(solved.field_x, solved.field_y, mesh, grid);
    tensor.residual_norm_x = solved.residual_norm_x;
    tensor.residual_norm_y = solved.residual_norm_y;
    tensor.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return tensor;
}

}  // namespace homog

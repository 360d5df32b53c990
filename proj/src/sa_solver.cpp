#include "homog/sa_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <Eigen/SparseLU>

namespace homog {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

double cosh_over_sinh(double alpha, double beta) {
    // cosh(alpha)/sinh(beta) for 0 <= |alpha| <= beta.  The naive quotient
    // overflows once beta exceeds ~710 even though the ratio itself is
    // bounded by ~exp(|alpha| - beta) <= 1.  Rewrite with the dominant
    // exponentials factored out:
    //   cosh(a)/sinh(b) = exp(a - b) * (1 + exp(-2a)) / (1 - exp(-2b)),
    // which stays in range for all beta; use it whenever beta is large
    // enough that the subtracted exponentials are negligible or safe.
    const double a = std::abs(alpha);
    if (beta > 30.0) {
        return std::exp(a - beta) * (1.0 + std::exp(-2.0 * a)) / (-std::expm1(-2.0 * beta));
    }
    return std::cosh(a) / std::sinh(beta);
}

std::size_t default_neig(std::size_t nx, std::size_t ny) {
    if (nx < 2 || ny < 2) {
        throw std::invalid_argument("default_neig: nx and ny must both be at least 2");
    }
    const std::size_t lo = std::max(nx, ny) - 1;
    const std::size_t hi = 2 * std::min(nx, ny) - 3;
    if (hi < lo) {
        std::ostringstream msg;
        msg << "default_neig: no admissible truncation order for nx=" << nx << ", ny=" << ny
            << " (requires max(nx,ny)-1 <= 2*min(nx,ny)-3)";
        throw std::invalid_argument(msg.str());
    }
    return std::max(lo, std::min<std::size_t>(hi, 100));
}

void validate_params(const BlockGrid& grid, const SolverParams& params) {
    const std::vector<std::string> errors = validate(grid);
    if (!errors.empty()) {
        throw std::invalid_argument("invalid grid: " + errors.front());
    }
    if (params.nx < 2 || params.ny < 2) {
        throw std::invalid_argument("solver params: nx and ny must both be at least 2");
    }
    const std::size_t lo = std::max(params.nx, params.ny) - 1;
    const std::size_t hi = 2 * std::min(params.nx, params.ny) - 3;
    if (hi < lo) {
        std::ostringstream msg;
        msg << "solver params: nx=" << params.nx << ", ny=" << params.ny
            << " leave no admissible truncation order"
            << " (requires max(nx,ny)-1 <= 2*min(nx,ny)-3)";
        throw std::invalid_argument(msg.str());
    }
    if (params.neig < lo || params.neig > hi) {
        std::ostringstream msg;
        msg << "solver params: neig=" << params.neig << " outside the admissible window ["
            << lo << ", " << hi << "] for nx=" << params.nx << ", ny=" << params.ny;
        throw std::invalid_argument(msg.str());
    }
}

namespace {

// Coefficient rows of the series solution evaluated at one point of a block
// with height h and width l: with G_L/G_R the flux samples on the left/right
// edges and Q_B/Q_T on the bottom/top edges,
//   v(point) = (1/D) * [ sum_p cL[p] G_L[p] + cR[p] G_R[p]
//                      + sum_p cB[p] Q_B[p] + cT[p] Q_T[p] ] + K.
// The 1/D factor is left out here so the tables depend on (h, l) only.
struct EdgeCoeffs {
    std::vector<double> cL, cR;  // size ny
    std::vector<double> cB, cT;  // size nx
};

// Evaluation tables for every interface abscissa on the four edges of a
// block of a given size.
struct BlockTables {
    std::vector<EdgeCoeffs> top, bottom;  // nx points each (the x abscissas)
    std::vector<EdgeCoeffs> left, right;  // ny points each (the y abscissas)
};

struct SeriesContext {
    double h = 0.0, l = 0.0;
    std::size_t neig = 0;
    const QuadratureRule* rx = nullptr;  // local rule on [0, l]
    const QuadratureRule* ry = nullptr;  // local rule on [0, h]
    std::vector<std::vector<double>> cos_x;  // [p][k] = cos(k pi x_p / l)
    std::vector<std::vector<double>> cos_y;  // [p][k] = cos(k pi y_p / h)
    std::vector<double> beta_h;              // [k] = k pi l / h
    std::vector<double> beta_l;              // [k] = k pi h / l
};

SeriesContext make_context(double h, double l, const QuadratureRule& rx,
                           const QuadratureRule& ry, std::size_t neig) {
    SeriesContext ctx;
    ctx.h = h;
    ctx.l = l;
    ctx.neig = neig;
    ctx.rx = &rx;
    ctx.ry = &ry;
    ctx.cos_x.assign(rx.size(), std::vector<double>(neig + 1, 1.0));
    ctx.cos_y.assign(ry.size(), std::vector<double>(neig + 1, 1.0));
    ctx.beta_h.assign(neig + 1, 0.0);
    ctx.beta_l.assign(neig + 1, 0.0);
    for (std::size_t k = 1; k <= neig; ++k) {
        const double kp = static_cast<double>(k) * kPi;
        ctx.beta_h[k] = kp * l / h;
        ctx.beta_l[k] = kp * h / l;
        for (std::size_t p = 0; p < rx.size(); ++p) {
            ctx.cos_x[p][k] = std::cos(kp * rx.points[p] / l);
        }
        for (std::size_t p = 0; p < ry.size(); ++p) {
            ctx.cos_y[p][k] = std::cos(kp * ry.points[p] / h);
        }
    }
    return ctx;
}

// Coefficients of v at local coordinates (xh, yh), 0 <= xh <= l, 0 <= yh <= h.
EdgeCoeffs coeffs_at(const SeriesContext& ctx, double xh, double yh) {
    const std::size_t nx = ctx.rx->size(), ny = ctx.ry->size();
    const double h = ctx.h, l = ctx.l;

    // Per-frequency factors shared by all samples of an edge.
    std::vector<double> rL(ctx.neig + 1, 0.0), rR(ctx.neig + 1, 0.0);
    std::vector<double> rB(ctx.neig + 1, 0.0), rT(ctx.neig + 1, 0.0);
    for (std::size_t k = 1; k <= ctx.neig; ++k) {
        const double kp = static_cast<double>(k) * kPi;
        const double cy = std::cos(kp * yh / h);
        const double cx = std::cos(kp * xh / l);
        rL[k] = cosh_over_sinh(kp * (xh - l) / h, ctx.beta_h[k]) * cy / kp;
        rR[k] = cosh_over_sinh(kp * xh / h, ctx.beta_h[k]) * cy / kp;
        rB[k] = cosh_over_sinh(kp * (yh - h) / l, ctx.beta_l[k]) * cx / kp;
        rT[k] = cosh_over_sinh(kp * yh / l, ctx.beta_l[k]) * cx / kp;
    }

    EdgeCoeffs e;
    e.cL.resize(ny);
    e.cR.resize(ny);
    e.cB.resize(nx);
    e.cT.resize(nx);
    const double quad_l = -(xh - l) * (xh - l) / (4.0 * l * h);
    const double quad_r = xh * xh / (4.0 * l * h);
    const double quad_b = -(yh - h) * (yh - h) / (4.0 * h * l);
    const double quad_t = yh * yh / (4.0 * h * l);
    for (std::size_t p = 0; p < ny; ++p) {
        double s_l = 0.0, s_r = 0.0;
        for (std::size_t k = 1; k <= ctx.neig; ++k) {
            s_l += ctx.cos_y[p][k] * rL[k];
            s_r += ctx.cos_y[p][k] * rR[k];
        }
        e.cL[p] = 2.0 * ctx.ry->weights[p] * (quad_l - s_l);
        e.cR[p] = 2.0 * ctx.ry->weights[p] * (quad_r + s_r);
    }
    for (std::size_t p = 0; p < nx; ++p) {
        double s_b = 0.0, s_t = 0.0;
        for (std::size_t k = 1; k <= ctx.neig; ++k) {
            s_b += ctx.cos_x[p][k] * rB[k];
            s_t += ctx.cos_x[p][k] * rT[k];
        }
        e.cB[p] = 2.0 * ctx.rx->weights[p] * (quad_b - s_b);
        e.cT[p] = 2.0 * ctx.rx->weights[p] * (quad_t + s_t);
    }
    return e;
}

BlockTables build_block_tables(const SeriesContext& ctx) {
    BlockTables t;
    const std::size_t nx = ctx.rx->size(), ny = ctx.ry->size();
    t.top.reserve(nx);
    t.bottom.reserve(nx);
    t.left.reserve(ny);
    t.right.reserve(ny);
    for (std::size_t q = 0; q < nx; ++q) {
        t.top.push_back(coeffs_at(ctx, ctx.rx->points[q], ctx.h));
        t.bottom.push_back(coeffs_at(ctx, ctx.rx->points[q], 0.0));
    }
    for (std::size_t e = 0; e < ny; ++e) {
        t.left.push_back(coeffs_at(ctx, 0.0, ctx.ry->points[e]));
        t.right.push_back(coeffs_at(ctx, ctx.l, ctx.ry->points[e]));
    }
    return t;
}

// Series coefficients a_k, b_k, c_k, d_k (k = 0..neig) of one block,
// reconstructed from the flux samples of one cell-problem solution.
struct BlockCoeffs {
    std::vector<double> a, b, c, d;
};

BlockCoeffs block_coeffs(const InterfaceSolution& sol, const BlockGrid& grid,
                         const SolverParams& params, std::size_t i, std::size_t j) {
    const IndexMap map{grid.m, grid.n, params.nx, params.ny};
    const double h = grid.h(i), l = grid.l(j);
    const double d_ij = grid.d(i, j);
    const QuadratureRule rx = midpoint_rule(0.0, l, params.nx);
    const QuadratureRule ry = midpoint_rule(0.0, h, params.ny);
    const std::vector<double>& g_l = sol.g_vals[map.l_id(i, j) - 1];
    const std::vector<double>& g_r = sol.g_vals[map.r_id(i, j) - 1];
    const std::vector<double>& q_b = sol.q_vals[map.b_id(i, j) - 1];
    const std::vector<double>& q_t = sol.q_vals[map.t_id(i, j) - 1];

    BlockCoeffs bc;
    bc.a.assign(params.neig + 1, 0.0);
    bc.b.assign(params.neig + 1, 0.0);
    bc.c.assign(params.neig + 1, 0.0);
    bc.d.assign(params.neig + 1, 0.0);
    for (std::size_t k = 0; k <= params.neig; ++k) {
        const double kp = static_cast<double>(k) * kPi;
        double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
        for (std::size_t p = 0; p < params.ny; ++p) {
            const double w_cos = ry.weights[p] * (k == 0 ? 1.0 : std::cos(kp * ry.points[p] / h));
            a += w_cos * g_l[p];
            b += w_cos * g_r[p];
        }
        for (std::size_t p = 0; p < params.nx; ++p) {
            const double w_cos = rx.weights[p] * (k == 0 ? 1.0 : std::cos(kp * rx.points[p] / l));
            c += w_cos * q_b[p];
            d += w_cos * q_t[p];
        }
        bc.a[k] = 2.0 * a / (d_ij * h);
        bc.b[k] = 2.0 * b / (d_ij * h);
        bc.c[k] = 2.0 * c / (d_ij * l);
        bc.d[k] = 2.0 * d / (d_ij * l);
    }
    return bc;
}

InterfaceSolution unpack(const Eigen::VectorXd& v, const IndexMap& map, Axis axis) {
    InterfaceSolution s;
    s.axis = axis;
    s.n_cols = map.n;
    const std::size_t mn = map.m * map.n;
    s.g_vals.assign(mn, std::vector<double>(map.ny));
    s.q_vals.assign(mn, std::vector<double>(map.nx));
    s.K.resize(mn);
    for (std::size_t f = 1; f <= mn; ++f) {
        for (std::size_t p = 1; p <= map.ny; ++p) {
            s.g_vals[f - 1][p - 1] = v[static_cast<Eigen::Index>(map.g_col(f, p))];
        }
        for (std::size_t p = 1; p <= map.nx; ++p) {
            s.q_vals[f - 1][p - 1] = v[static_cast<Eigen::Index>(map.q_col(f, p))];
        }
    }
    for (std::size_t i = 1; i <= map.m; ++i) {
        for (std::size_t j = 1; j <= map.n; ++j) {
            s.K[(i - 1) * map.n + (j - 1)] = v[static_cast<Eigen::Index>(map.k_col(i, j))];
        }
    }
    return s;
}

}  // namespace

AssembledSystem assemble_system(const BlockGrid& grid, const SolverParams& params,
                                bool use_cache) {
    validate_params(grid, params);
    const std::size_t m = grid.m, n = grid.n;
    const std::size_t nx = params.nx, ny = params.ny;
    const IndexMap map{m, n, nx, ny};
    const std::size_t N = map.size();

    // Local quadrature rules, one per distinct span length per direction.
    std::map<double, QuadratureRule> x_rules, y_rules;
    auto x_rule = [&](std::size_t j) -> const QuadratureRule& {
        const double l = grid.l(j);
        auto it = x_rules.find(l);
        if (it == x_rules.end()) it = x_rules.emplace(l, midpoint_rule(0.0, l, nx)).first;
        return it->second;
    };
    auto y_rule = [&](std::size_t i) -> const QuadratureRule& {
        const double h = grid.h(i);
        auto it = y_rules.find(h);
        if (it == y_rules.end()) it = y_rules.emplace(h, midpoint_rule(0.0, h, ny)).first;
        return it->second;
    };

    // Evaluation tables per block; with the cache on, one per distinct size.
    std::deque<BlockTables> owned;
    std::map<std::pair<double, double>, const BlockTables*> cache;
    std::vector<const BlockTables*> tbl(m * n, nullptr);
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            const std::pair<double, double> key{grid.h(i), grid.l(j)};
            if (use_cache) {
                const auto it = cache.find(key);
                if (it != cache.end()) {
                    tbl[(i - 1) * n + (j - 1)] = it->second;
                    continue;
                }
            }
            const SeriesContext ctx =
                make_context(key.first, key.second, x_rule(j), y_rule(i), params.neig);
            owned.push_back(build_block_tables(ctx));
            tbl[(i - 1) * n + (j - 1)] = &owned.back();
            if (use_cache) cache.emplace(key, &owned.back());
        }
    }

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(m * n * (nx + ny) * (2 * (nx + ny) + 1) + 2 * m * n * (nx + ny));
    Eigen::VectorXd b_x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
    Eigen::VectorXd b_y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));

    // Adds sign * v_{i,j}(eval point) to a row.
    const auto emit = [&](std::size_t row, std::size_t i, std::size_t j, const EdgeCoeffs& c,
                          double sign) {
        const double s_inv_d = sign / grid.d(i, j);
        const std::size_t f_l = map.l_id(i, j), f_r = map.r_id(i, j);
        const std::size_t f_b = map.b_id(i, j), f_t = map.t_id(i, j);
        const int r = static_cast<int>(row);
        for (std::size_t p = 1; p <= ny; ++p) {
            trips.emplace_back(r, static_cast<int>(map.g_col(f_l, p)), s_inv_d * c.cL[p - 1]);
            trips.emplace_back(r, static_cast<int>(map.g_col(f_r, p)), s_inv_d * c.cR[p - 1]);
        }
        for (std::size_t p = 1; p <= nx; ++p) {
            trips.emplace_back(r, static_cast<int>(map.q_col(f_b, p)), s_inv_d * c.cB[p - 1]);
            trips.emplace_back(r, static_cast<int>(map.q_col(f_t, p)), s_inv_d * c.cT[p - 1]);
        }
        trips.emplace_back(r, static_cast<int>(map.k_col(i, j)), sign);
    };

    std::size_t row = 0;

    // Continuity of v across interior horizontal interfaces:
    // v_{i+1,j}(x_q, y_i) - v_{i,j}(x_q, y_i) = 0 at every x abscissa.
    for (std::size_t i = 1; i < m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            for (std::size_t e = 0; e < nx; ++e, ++row) {
                emit(row, i + 1, j, tbl[i * n + (j - 1)]->bottom[e], +1.0);
                emit(row, i, j, tbl[(i - 1) * n + (j - 1)]->top[e], -1.0);
            }
        }
    }
    // Periodicity in y: v_{m,j}(x_q, y_m) - v_{1,j}(x_q, y_0) equals the jump
    // of the linear part (height of the cell for the y problem, 0 for x).
    for (std::size_t j = 1; j <= n; ++j) {
        for (std::size_t e = 0; e < nx; ++e, ++row) {
            emit(row, m, j, tbl[(m - 1) * n + (j - 1)]->top[e], +1.0);
            emit(row, 1, j, tbl[j - 1]->bottom[e], -1.0);
            b_y[static_cast<Eigen::Index>(row)] = grid.ym() - grid.y0();
        }
    }
    // Continuity across interior vertical interfaces.
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j < n; ++j) {
            for (std::size_t e = 0; e < ny; ++e, ++row) {
                emit(row, i, j + 1, tbl[(i - 1) * n + j]->left[e], +1.0);
                emit(row, i, j, tbl[(i - 1) * n + (j - 1)]->right[e], -1.0);
            }
        }
    }
    // Periodicity in x.
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t e = 0; e < ny; ++e, ++row) {
            emit(row, i, n, tbl[(i - 1) * n + (n - 1)]->right[e], +1.0);
            emit(row, i, 1, tbl[(i - 1) * n]->left[e], -1.0);
            b_x[static_cast<Eigen::Index>(row)] = grid.xn() - grid.x0();
        }
    }
    // Zero net flux through each block boundary; the last block's condition
    // is implied by the others, so it is dropped.  When a block's left and
    // right edges are the same interface (n = 1) those contributions cancel
    // identically and are skipped, likewise top/bottom for m = 1.
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            if (i == m && j == n) continue;
            const double inv_d = 1.0 / grid.d(i, j);
            const int r = static_cast<int>(row);
            if (n > 1) {
                const QuadratureRule& ry = y_rule(i);
                const std::size_t f_l = map.l_id(i, j), f_r = map.r_id(i, j);
                for (std::size_t p = 1; p <= ny; ++p) {
                    trips.emplace_back(r, static_cast<int>(map.g_col(f_l, p)),
                                       +ry.weights[p - 1] * inv_d);
                    trips.emplace_back(r, static_cast<int>(map.g_col(f_r, p)),
                                       -ry.weights[p - 1] * inv_d);
                }
            }
            if (m > 1) {
                const QuadratureRule& rx = x_rule(j);
                const std::size_t f_b = map.b_id(i, j), f_t = map.t_id(i, j);
                for (std::size_t p = 1; p <= nx; ++p) {
                    trips.emplace_back(r, static_cast<int>(map.q_col(f_b, p)),
                                       +rx.weights[p - 1] * inv_d);
                    trips.emplace_back(r, static_cast<int>(map.q_col(f_t, p)),
                                       -rx.weights[p - 1] * inv_d);
                }
            }
            ++row;
        }
    }
    // Exact zero mean of psi = v - xi over the cell.  Per block,
    //   integral of v = A_ij K_ij + l_j^2 sum_p w_y[p] (G_R - G_L)[p] / (6 D_ij)
    //                 + h_i^2 sum_p w_x[p] (Q_T - Q_B)[p] / (6 D_ij)
    // (the cosine series integrates to zero), and the right-hand side is the
    // cell mean of the coordinate.
    {
        const double area = grid.area();
        const int r = static_cast<int>(row);
        for (std::size_t i = 1; i <= m; ++i) {
            for (std::size_t j = 1; j <= n; ++j) {
                trips.emplace_back(r, static_cast<int>(map.k_col(i, j)),
                                   grid.block_area(i, j) / area);
                const double inv = 1.0 / (6.0 * grid.d(i, j) * area);
                if (n > 1) {
                    const QuadratureRule& ry = y_rule(i);
                    const double l2 = grid.l(j) * grid.l(j);
                    const std::size_t f_l = map.l_id(i, j), f_r = map.r_id(i, j);
                    for (std::size_t p = 1; p <= ny; ++p) {
                        trips.emplace_back(r, static_cast<int>(map.g_col(f_r, p)),
                                           +l2 * ry.weights[p - 1] * inv);
                        trips.emplace_back(r, static_cast<int>(map.g_col(f_l, p)),
                                           -l2 * ry.weights[p - 1] * inv);
                    }
                }
                if (m > 1) {
                    const QuadratureRule& rx = x_rule(j);
                    const double h2 = grid.h(i) * grid.h(i);
                    const std::size_t f_b = map.b_id(i, j), f_t = map.t_id(i, j);
                    for (std::size_t p = 1; p <= nx; ++p) {
                        trips.emplace_back(r, static_cast<int>(map.q_col(f_t, p)),
                                           +h2 * rx.weights[p - 1] * inv);
                        trips.emplace_back(r, static_cast<int>(map.q_col(f_b, p)),
                                           -h2 * rx.weights[p - 1] * inv);
                    }
                }
            }
        }
        b_x[static_cast<Eigen::Index>(row)] = 0.5 * (grid.x0() + grid.xn());
        b_y[static_cast<Eigen::Index>(row)] = 0.5 * (grid.y0() + grid.ym());
        ++row;
    }

    if (row != N) {
        throw std::logic_error("assemble_system: row count mismatch");
    }

    AssembledSystem sys;
    sys.A.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    sys.A.setFromTriplets(trips.begin(), trips.end());
    sys.A.makeCompressed();
    sys.b_x = std::move(b_x);
    sys.b_y = std::move(b_y);
    sys.map = map;
    sys.params = params;
    return sys;
}

BlockLayout sa_block_layout(const IndexMap& map) {
    const std::size_t m = map.m, n = map.n, nx = map.nx, ny = map.ny;
    const auto order = torus_dissection_order(m, n);
    std::vector<int> pos(m * n);  // block (i-1, j-1) -> elimination position
    for (std::size_t k = 0; k < order.size(); ++k) {
        pos[order[k].first * n + order[k].second] = static_cast<int>(k);
    }

    BlockLayout lay;
    lay.dim = static_cast<int>(nx + ny + 1);
    lay.count = static_cast<int>(m * n);
    lay.col_node.assign(map.size(), -1);
    lay.col_slot.assign(map.size(), -1);
    lay.row_node.assign(map.size(), -1);
    lay.row_slot.assign(map.size(), -1);

    // Columns: block (i,j) owns the g samples of its right edge, the q
    // samples of its top edge, and its own constant.  The wrap in r_id/t_id
    // makes every interface the right/top edge of exactly one block.
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            const int k = pos[(i - 1) * n + (j - 1)];
            int slot = 0;
            for (std::size_t p = 1; p <= ny; ++p, ++slot) {
                lay.col_node[map.g_col(map.r_id(i, j), p)] = k;
                lay.col_slot[map.g_col(map.r_id(i, j), p)] = slot;
            }
            for (std::size_t p = 1; p <= nx; ++p, ++slot) {
                lay.col_node[map.q_col(map.t_id(i, j), p)] = k;
                lay.col_slot[map.q_col(map.t_id(i, j), p)] = slot;
            }
            lay.col_node[map.k_col(i, j)] = k;
            lay.col_slot[map.k_col(i, j)] = slot;
        }
    }

    // Rows mirror the assembly layout: horizontal continuity (interior rows
    // i = 1..m-1, then the periodic row), vertical continuity (interior
    // columns, then the periodic column), per-block flux balance with the
    // last block skipped, and the global zero-mean row, which stands in as
    // that block's flux row.  Each batch is homed to the block whose top or
    // right edge carries it, giving nx + ny + 1 rows per block.
    std::size_t row = 0;
    const auto home = [&](std::size_t i, std::size_t j, std::size_t cnt) {
        const int k = pos[(i - 1) * n + (j - 1)];
        for (std::size_t q = 0; q < cnt; ++q, ++row) lay.row_node[row] = k;
    };
    for (std::size_t i = 1; i < m; ++i)
        for (std::size_t j = 1; j <= n; ++j) home(i, j, nx);
    for (std::size_t j = 1; j <= n; ++j) home(m, j, nx);
    for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t j = 1; j < n; ++j) home(i, j, ny);
    for (std::size_t i = 1; i <= m; ++i) home(i, n, ny);
    for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t j = 1; j <= n; ++j) {
            if (i == m && j == n) continue;
            home(i, j, 1);
        }
    home(m, n, 1);  // global zero-mean row

    std::vector<int> used(m * n, 0);
    for (std::size_t q = 0; q < map.size(); ++q) {
        lay.row_slot[q] = used[static_cast<std::size_t>(lay.row_node[q])]++;
    }
    return lay;
}

SaSolution solve_system(const AssembledSystem& system, const BlockGrid& grid) {
    if (system.map.m != grid.m || system.map.n != grid.n) {
        throw std::invalid_argument("solve_system: system was assembled for a different grid");
    }

    Eigen::VectorXd x, y;
    double res_x = 0.0, res_y = 0.0;
    const auto residuals = [&] {
        res_x = (system.A * x - system.b_x).norm();
        res_y = (system.A * y - system.b_y).norm();
    };

    // Fast path: structured block LU over the supernode lattice.  Refuse its
    // answer (and redo with a general sparse LU) if a diagonal block came out
    // singular or the residual is far above what a healthy elimination
    // leaves; the unpivoted-across-blocks factorization has no other failure
    // mode.
    bool solved = false;
    const BlockLuFactor blu = block_lu_factorize(system.A, sa_block_layout(system.map));
    if (blu.ok) {
        x = block_lu_solve(blu, system.b_x);
        y = block_lu_solve(blu, system.b_y);
        residuals();
        const double guard =
            1e-10 * std::max({1.0, system.b_x.norm(), system.b_y.norm()});
        solved = res_x <= guard && res_y <= guard;
    }
    if (!solved) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(system.A);
        lu.factorize(system.A);
        if (lu.info() != Eigen::Success) {
            throw std::runtime_error(
                "solve_system: factorization failed (matrix numerically singular; check that "
                "neig lies in [max(nx,ny)-1, 2*min(nx,ny)-3])");
        }
        x = lu.solve(system.b_x);
        y = lu.solve(system.b_y);
        residuals();
    }

    SaSolution sol;
    sol.sol_x = unpack(x, system.map, Axis::x);
    sol.sol_y = unpack(y, system.map, Axis::y);
    sol.residual_norm_x = res_x;
    sol.residual_norm_y = res_y;
    return sol;
}

double evaluate_v_in_block(const InterfaceSolution& sol, const BlockGrid& grid,
                           const SolverParams& params, std::size_t i, std::size_t j, double x,
                           double y) {
    const double h = grid.h(i), l = grid.l(j);
    const double xh = x - grid.x_breaks[j - 1];
    const double yh = y - grid.y_breaks[i - 1];
    const BlockCoeffs bc = block_coeffs(sol, grid, params, i, j);

    double v = -bc.a[0] * (xh - l) * (xh - l) / (4.0 * l) + bc.b[0] * xh * xh / (4.0 * l) -
               bc.c[0] * (yh - h) * (yh - h) / (4.0 * h) + bc.d[0] * yh * yh / (4.0 * h) +
               sol.K[(i - 1) * grid.n + (j - 1)];
    for (std::size_t k = 1; k <= params.neig; ++k) {
        const double kp = static_cast<double>(k) * kPi;
        const double beta_h = kp * l / h, beta_l = kp * h / l;
        const double cy = std::cos(kp * yh / h), cx = std::cos(kp * xh / l);
        v += (-h * bc.a[k] * cosh_over_sinh(kp * (xh - l) / h, beta_h) +
              h * bc.b[k] * cosh_over_sinh(kp * xh / h, beta_h)) *
             cy / kp;
        v += (-l * bc.c[k] * cosh_over_sinh(kp * (yh - h) / l, beta_l) +
              l * bc.d[k] * cosh_over_sinh(kp * yh / l, beta_l)) *
             cx / kp;
    }
    return v;
}

double evaluate_v(const InterfaceSolution& sol, const BlockGrid& grid, const SolverParams& params,
                  double x, double y) {
    const auto [i, j] = block_of(grid, x, y);
    return evaluate_v_in_block(sol, grid, params, i, j, x, y);
}

double evaluate_psi(const InterfaceSolution& sol, const BlockGrid& grid,
                    const SolverParams& params, double x, double y) {
    return evaluate_v(sol, grid, params, x, y) - (sol.axis == Axis::x ? x : y);
}

namespace {

// Integrals of D * dv/dx and D * dv/dy over the whole cell for one solution.
// Per block, integrating the series solution exactly:
//   int D dv/dx = D_ij [ A_ij (a_0 + b_0)/4
//                        + l_j^2 sum_k (c_k - d_k) (1 - (-1)^k) / (k pi)^2 ],
//   int D dv/dy = D_ij [ A_ij (c_0 + d_0)/4
//                        + h_i^2 sum_k (a_k - b_k) (1 - (-1)^k) / (k pi)^2 ].
struct FluxIntegrals {
    double fx = 0.0, fy = 0.0;
};

FluxIntegrals integrate_flux(const InterfaceSolution& sol, const BlockGrid& grid,
                             const SolverParams& params) {
    FluxIntegrals out;
    for (std::size_t i = 1; i <= grid.m; ++i) {
        for (std::size_t j = 1; j <= grid.n; ++j) {
            const BlockCoeffs bc = block_coeffs(sol, grid, params, i, j);
            const double a_blk = grid.block_area(i, j);
            const double h = grid.h(i), l = grid.l(j);
            double s_cd = 0.0, s_ab = 0.0;
            for (std::size_t k = 1; k <= params.neig; k += 2) {
                const double kp = static_cast<double>(k) * kPi;
                s_cd += 2.0 * (bc.c[k] - bc.d[k]) / (kp * kp);
                s_ab += 2.0 * (bc.a[k] - bc.b[k]) / (kp * kp);
            }
            const double d_ij = grid.d(i, j);
            out.fx += d_ij * (a_blk * (bc.a[0] + bc.b[0]) / 4.0 + l * l * s_cd);
            out.fy += d_ij * (a_blk * (bc.c[0] + bc.d[0]) / 4.0 + h * h * s_ab);
        }
    }
    return out;
}

}  // namespace

EffectiveTensor effective_tensor(const SaSolution& solution, const BlockGrid& grid,
                                 const SolverParams& params) {
    const double area = grid.area();
    const FluxIntegrals col_x = integrate_flux(solution.sol_x, grid, params);
    const FluxIntegrals col_y = integrate_flux(solution.sol_y, grid, params);
    EffectiveTensor t;
    t.d11 = col_x.fx / area;
    t.d21 = col_x.fy / area;
    t.d12 = col_y.fx / area;
    t.d22 = col_y.fy / area;
    t.residual_norm_x = solution.residual_norm_x;
    t.residual_norm_y = solution.residual_norm_y;
    return t;
}

SaSolution sa_solve(const BlockGrid& grid, const SolverParams& params, bool use_cache) {
    const AssembledSystem sys = assemble_system(grid, params, use_cache);
    return solve_system(sys, grid);
}

EffectiveTensor sa_effective_tensor(const BlockGrid& grid, const SolverParams& params,
                                    bool use_cache) {
    const auto t0 = std::chrono::steady_clock::now();
    const AssembledSystem sys = assemble_system(grid, params, use_cache);
    const SaSolution sol = solve_system(sys, grid);
    EffectiveTensor t = effective_tensor(sol, grid, params);
    const auto t1 = std::chrono::steady_clock::now();
    t.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    return t;
}

}  // namespace homog

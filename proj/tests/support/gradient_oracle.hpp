// Independent oracle for the effective tensor: reconstruct each block's
// series coefficients straight from the solved interface-flux samples,
// differentiate the per-block solution analytically, and integrate
// D * grad v over every block with tensor-product Gauss-Legendre quadrature.
// The only machinery shared with the library is the solve itself and the
// coefficient-reconstruction formulas that define the method; the
// integration path is entirely separate from the closed-form tensor.
//
// Used by the unit suite and the acceptance suite, which both reconcile the
// closed-form tensor against this oracle.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "homog/grid.hpp"
#include "homog/quadrature.hpp"
#include "homog/sa_solver.hpp"
#include "homog/tensor.hpp"

namespace testoracle {

inline constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
struct GaussRule {
    std::vector<double> x, w;
};

inline GaussRule gauss_legendre(std::size_t n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(kPi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kd = static_cast<double>(k);
                const double p2 = ((2.0 * kd - 1.0) * t * p1 - (kd - 1.0) * p0) / kd;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (t * p1 - p0) / (t * t - 1.0);
            const double step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-15) break;
        }
        r.x[i] = -t;
        r.x[n - 1 - i] = t;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    return r;
}

// Overflow-safe sinh(alpha)/sinh(beta) for |alpha| <= beta.
inline double sinh_over_sinh(double alpha, double beta) {
    if (beta <= 30.0) return std::sinh(alpha) / std::sinh(beta);
    const double mag = std::abs(alpha);
    const double ratio = std::exp(mag - beta) * std::expm1(-2.0 * mag) / std::expm1(-2.0 * beta);
    return alpha < 0.0 ? -ratio : ratio;
}

inline double cosh_over_sinh(double alpha, double beta) {
    if (beta <= 30.0) return std::cosh(alpha) / std::sinh(beta);
    const double mag = std::abs(alpha);
    return std::exp(mag - beta) * (1.0 + std::exp(-2.0 * mag)) / -std::expm1(-2.0 * beta);
}

// Series coefficients of block (i,j), reconstructed from the flux samples.
struct Coeffs {
    std::vector<double> a, b, c, d;
};

inline Coeffs reconstruct(const homog::InterfaceSolution& sol, const homog::BlockGrid& grid,
                          const homog::SolverParams& params, std::size_t i, std::size_t j) {
    const homog::IndexMap map{grid.m, grid.n, params.nx, params.ny};
    const double h = grid.h(i), l = grid.l(j), d_ij = grid.d(i, j);
    const homog::QuadratureRule rx = homog::midpoint_rule(0.0, l, params.nx);
    const homog::QuadratureRule ry = homog::midpoint_rule(0.0, h, params.ny);
    const auto& g_l = sol.g_vals[map.l_id(i, j) - 1];
    const auto& g_r = sol.g_vals[map.r_id(i, j) - 1];
    const auto& q_b = sol.q_vals[map.b_id(i, j) - 1];
    const auto& q_t = sol.q_vals[map.t_id(i, j) - 1];

    Coeffs co;
    co.a.assign(params.neig + 1, 0.0);
    co.b.assign(params.neig + 1, 0.0);
    co.c.assign(params.neig + 1, 0.0);
    co.d.assign(params.neig + 1, 0.0);
    for (std::size_t k = 0; k <= params.neig; ++k) {
        const double kp = static_cast<double>(k) * kPi;
        double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
        for (std::size_t p = 0; p < params.ny; ++p) {
            const double wc = ry.weights[p] * (k == 0 ? 1.0 : std::cos(kp * ry.points[p] / h));
            a += wc * g_l[p];
            b += wc * g_r[p];
        }
        for (std::size_t p = 0; p < params.nx; ++p) {
            const double wc = rx.weights[p] * (k == 0 ? 1.0 : std::cos(kp * rx.points[p] / l));
            c += wc * q_b[p];
            d += wc * q_t[p];
        }
        co.a[k] = 2.0 * a / (d_ij * h);
        co.b[k] = 2.0 * b / (d_ij * h);
        co.c[k] = 2.0 * c / (d_ij * l);
        co.d[k] = 2.0 * d / (d_ij * l);
    }
    return co;
}

// Integrals of D dv/dx and D dv/dy over the cell, by per-block Gauss-Legendre
// quadrature of the analytically differentiated series.
struct FluxColumn {
    double fx = 0.0, fy = 0.0;
};

inline FluxColumn integrate_gradient(const homog::InterfaceSolution& sol,
                                     const homog::BlockGrid& grid,
                                     const homog::SolverParams& params) {
    const std::size_t neig = params.neig;
    const std::size_t ng = 2 * neig + 12;
    const GaussRule gauss = gauss_legendre(ng);
    FluxColumn out;

    for (std::size_t i = 1; i <= grid.m; ++i) {
        for (std::size_t j = 1; j <= grid.n; ++j) {
            const double h = grid.h(i), l = grid.l(j), d_ij = grid.d(i, j);
            const Coeffs co = reconstruct(sol, grid, params, i, j);

            // Gauss nodes mapped into the block (local coordinates).
            std::vector<double> xs(ng), ys(ng);
            for (std::size_t gp = 0; gp < ng; ++gp) {
                xs[gp] = 0.5 * l * (gauss.x[gp] + 1.0);
                ys[gp] = 0.5 * h * (gauss.x[gp] + 1.0);
            }

            // 1D tables in k and node index: hyperbolic ratios in the
            // coordinate each term varies with, trig factors in the other.
            std::vector<std::vector<double>> sxa(neig + 1), sxb(neig + 1), rxa(neig + 1),
                rxb(neig + 1), cos_x(neig + 1), sin_x(neig + 1), syc(neig + 1), syd(neig + 1),
                ryc(neig + 1), ryd(neig + 1), cos_y(neig + 1), sin_y(neig + 1);
            for (std::size_t k = 1; k <= neig; ++k) {
                const double kp = static_cast<double>(k) * kPi;
                const double beta_h = kp * l / h, beta_l = kp * h / l;
                sxa[k].resize(ng);
                sxb[k].resize(ng);
                rxa[k].resize(ng);
                rxb[k].resize(ng);
                cos_x[k].resize(ng);
                sin_x[k].resize(ng);
                syc[k].resize(ng);
                syd[k].resize(ng);
                ryc[k].resize(ng);
                ryd[k].resize(ng);
                cos_y[k].resize(ng);
                sin_y[k].resize(ng);
                for (std::size_t gp = 0; gp < ng; ++gp) {
                    const double xh = xs[gp], yh = ys[gp];
                    sxa[k][gp] = sinh_over_sinh(kp * (xh - l) / h, beta_h);
                    sxb[k][gp] = sinh_over_sinh(kp * xh / h, beta_h);
                    rxa[k][gp] = cosh_over_sinh(kp * (xh - l) / h, beta_h);
                    rxb[k][gp] = cosh_over_sinh(kp * xh / h, beta_h);
                    cos_x[k][gp] = std::cos(kp * xh / l);
                    sin_x[k][gp] = std::sin(kp * xh / l);
                    syc[k][gp] = sinh_over_sinh(kp * (yh - h) / l, beta_l);
                    syd[k][gp] = sinh_over_sinh(kp * yh / l, beta_l);
                    ryc[k][gp] = cosh_over_sinh(kp * (yh - h) / l, beta_l);
                    ryd[k][gp] = cosh_over_sinh(kp * yh / l, beta_l);
                    cos_y[k][gp] = std::cos(kp * yh / h);
                    sin_y[k][gp] = std::sin(kp * yh / h);
                }
            }

            double fx = 0.0, fy = 0.0;
            for (std::size_t gy = 0; gy < ng; ++gy) {
                for (std::size_t gx = 0; gx < ng; ++gx) {
                    const double xh = xs[gx], yh = ys[gy];
                    double dvdx = (-co.a[0] * (xh - l) + co.b[0] * xh) / (2.0 * l);
                    double dvdy = (-co.c[0] * (yh - h) + co.d[0] * yh) / (2.0 * h);
                    for (std::size_t k = 1; k <= neig; ++k) {
                        dvdx += (-co.a[k] * sxa[k][gx] + co.b[k] * sxb[k][gx]) * cos_y[k][gy] +
                                (co.c[k] * ryc[k][gy] - co.d[k] * ryd[k][gy]) * sin_x[k][gx];
                        dvdy += (co.a[k] * rxa[k][gx] - co.b[k] * rxb[k][gx]) * sin_y[k][gy] +
                                (-co.c[k] * syc[k][gy] + co.d[k] * syd[k][gy]) * cos_x[k][gx];
                    }
                    const double w2 = gauss.w[gx] * gauss.w[gy];
                    fx += w2 * dvdx;
                    fy += w2 * dvdy;
                }
            }
            const double jac = 0.25 * l * h;
            out.fx += d_ij * jac * fx;
            out.fy += d_ij * jac * fy;
        }
    }
    return out;
}

inline homog::EffectiveTensor oracle_tensor(const homog::SaSolution& solution,
                                            const homog::BlockGrid& grid,
                                            const homog::SolverParams& params) {
    const double area = grid.area();
    const FluxColumn col_x = integrate_gradient(solution.sol_x, grid, params);
    const FluxColumn col_y = integrate_gradient(solution.sol_y, grid, params);
    homog::EffectiveTensor t;
    t.d11 = col_x.fx / area;
    t.d21 = col_x.fy / area;
    t.d12 = col_y.fx / area;
    t.d22 = col_y.fy / area;
    return t;
}

}  // namespace testoracle

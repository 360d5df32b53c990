#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>

#include "homog/grid.hpp"
#include "homog/quadrature.hpp"
#include "homog/sa_solver.hpp"
#include "homog/tensor.hpp"
#include "support/cases.hpp"

using homog::BlockGrid;
using homog::EffectiveTensor;
using homog::IndexMap;
using homog::SaSolution;
using homog::SolverParams;

namespace {

// Dense comparison helper: true iff the two sparse matrices hold exactly the
// same coefficients.
bool identical(const Eigen::SparseMatrix<double>& a, const Eigen::SparseMatrix<double>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    const Eigen::MatrixXd da(a), db(b);
    return (da.array() == db.array()).all();
}

}  // namespace

TEST_CASE("default_neig follows the truncation window with its cap") {
    CHECK(homog::default_neig(16, 16) == 29);
    CHECK(homog::default_neig(4, 4) == 5);
    CHECK(homog::default_neig(64, 64) == 100);
    CHECK(homog::default_neig(2, 2) == 1);
    // Asymmetric abscissa counts: window is [max-1, 2*min-3].
    CHECK(homog::default_neig(8, 6) == 9);
    CHECK_THROWS_AS(homog::default_neig(4, 16), std::invalid_argument);  // empty window
    CHECK_THROWS_AS(homog::default_neig(1, 4), std::invalid_argument);
}

TEST_CASE("validate_params enforces the truncation window") {
    const BlockGrid grid = testcases::case1();
    CHECK_NOTHROW(homog::validate_params(grid, {16, 16, 29}));
    CHECK_NOTHROW(homog::validate_params(grid, {16, 16, 15}));
    // Below the window (singular system) and above it (quadrature aliasing).
    CHECK_THROWS_AS(homog::validate_params(grid, {16, 16, 14}), std::invalid_argument);
    CHECK_THROWS_AS(homog::validate_params(grid, {16, 16, 30}), std::invalid_argument);
    CHECK_THROWS_AS(homog::validate_params(grid, {1, 16, 5}), std::invalid_argument);
    CHECK_THROWS_AS(homog::validate_params(grid, {16, 1, 5}), std::invalid_argument);
}

TEST_CASE("IndexMap lays out unknowns contiguously") {
    SUBCASE("system dimensions") {
        CHECK(IndexMap{4, 4, 4, 4}.size() == 144);
        CHECK(IndexMap{8, 8, 16, 16}.size() == 2112);
        CHECK(IndexMap{16, 16, 4, 4}.size() == 2304);
    }
    SUBCASE("column ranges") {
        const IndexMap map{3, 2, 4, 5};
        CHECK(map.g_col(1, 1) == 0);
        CHECK(map.g_col(6, 5) == 6 * 5 - 1);
        CHECK(map.q_col(1, 1) == 6 * 5);
        CHECK(map.q_col(6, 4) == 6 * 5 + 6 * 4 - 1);
        CHECK(map.k_col(1, 1) == 6 * 9);
        CHECK(map.k_col(3, 2) == map.size() - 1);
    }
    SUBCASE("interface ids wrap around") {
        const IndexMap map{3, 4, 2, 2};
        CHECK(map.l_id(2, 3) == 7);
        CHECK(map.r_id(2, 3) == 8);
        CHECK(map.r_id(2, 4) == map.l_id(2, 1));  // right edge of the last column
        CHECK(map.b_id(2, 3) == 8);
        CHECK(map.t_id(2, 3) == 9);
        CHECK(map.t_id(3, 2) == map.b_id(1, 2));  // top edge of the last row
    }
}

TEST_CASE("assembled system is identical with the block-size cache on or off") {
    // Mixed block sizes so several distinct (h, l) pairs are exercised.
    BlockGrid grid;
    grid.m = 3;
    grid.n = 2;
    grid.x_breaks = {0.0, 0.3, 1.0};
    grid.y_breaks = {0.0, 0.25, 0.5, 1.0};
    grid.D = {1.0, 0.2, 0.2, 5.0, 1.0, 1.0};
    const SolverParams params{4, 4, 5};

    const homog::AssembledSystem cached = homog::assemble_system(grid, params, true);
    const homog::AssembledSystem plain = homog::assemble_system(grid, params, false);
    CHECK(identical(cached.A, plain.A));
    CHECK((cached.b_x - plain.b_x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((cached.b_y - plain.b_y).cwiseAbs().maxCoeff() == 0.0);

    const EffectiveTensor t_cached = homog::sa_effective_tensor(grid, params, true);
    const EffectiveTensor t_plain = homog::sa_effective_tensor(grid, params, false);
    CHECK(t_cached.d11 == t_plain.d11);
    CHECK(t_cached.d12 == t_plain.d12);
    CHECK(t_cached.d21 == t_plain.d21);
    CHECK(t_cached.d22 == t_plain.d22);
}

TEST_CASE("homogeneous medium: unit gradients, constant fluxes, vanishing corrector") {
    const double d = 7.3;
    const BlockGrid grid = testcases::homogeneous(d, 3, 3);
    const SolverParams params{4, 4, 5};
    const SaSolution sol = homog::sa_solve(grid, params);

    // For xi = x the solution is v = x + const: every vertical interface
    // carries flux D, every horizontal interface carries none.
    for (const auto& g : sol.sol_x.g_vals)
        for (const double v : g) CHECK(v == doctest::Approx(d).epsilon(1e-10));
    for (const auto& q : sol.sol_x.q_vals)
        for (const double v : q) CHECK(std::abs(v) <= d * 1e-10);

    for (double x : {0.13, 0.5, 0.77}) {
        for (double y : {0.21, 0.5, 0.9}) {
            CHECK(std::abs(homog::evaluate_psi(sol.sol_x, grid, params, x, y)) <= 1e-10);
            CHECK(std::abs(homog::evaluate_psi(sol.sol_y, grid, params, x, y)) <= 1e-10);
        }
    }

    const EffectiveTensor t = homog::effective_tensor(sol, grid, params);
    CHECK(t.d11 == doctest::Approx(d).epsilon(1e-12));
    CHECK(t.d22 == doctest::Approx(d).epsilon(1e-12));
    CHECK(std::abs(t.d12) <= d * 1e-12);
    CHECK(std::abs(t.d21) <= d * 1e-12);
}

TEST_CASE("two-layer medium reproduces the arithmetic and harmonic means exactly") {
    const BlockGrid grid = testcases::layered();
    const SolverParams params{8, 8, 13};
    const SaSolution sol = homog::sa_solve(grid, params);
    const EffectiveTensor t = homog::effective_tensor(sol, grid, params);
    CHECK(t.d11 == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(t.d22 == doctest::Approx(2.0 / 11.0).epsilon(1e-12));
    CHECK(std::abs(t.d12) <= 1e-12);
    CHECK(std::abs(t.d21) <= 1e-12);

    // xi = y: the through-layer flux is the constant harmonic mean on every
    // horizontal interface; xi = x: each vertical interface carries its own
    // layer's diffusivity.
    for (const auto& q : sol.sol_y.q_vals)
        for (const double v : q) CHECK(v == doctest::Approx(2.0 / 11.0).epsilon(1e-10));
    CHECK(sol.sol_x.g_vals[0][0] == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(sol.sol_x.g_vals[1][0] == doctest::Approx(1.0).epsilon(1e-10));

    // Transpose of the medium transposes the tensor.
    const BlockGrid grid_t = homog::new_uniform(1, 2, {0.1, 1.0});
    const EffectiveTensor tt = homog::sa_effective_tensor(grid_t, params);
    CHECK(tt.d11 == doctest::Approx(t.d22).epsilon(1e-12));
    CHECK(tt.d22 == doctest::Approx(t.d11).epsilon(1e-12));
}

TEST_CASE("solution is continuous across interfaces and periodic across the boundary") {
    const BlockGrid grid = testcases::case1();
    const SolverParams params{16, 16, 29};
    const SaSolution sol = homog::sa_solve(grid, params);

    // Shared horizontal interface between blocks (1,1) and (2,1): re-evaluate
    // v from both sides at the interface abscissas.
    const homog::QuadratureRule rx = homog::midpoint_rule(grid.x_breaks[0], grid.x_breaks[1], 16);
    const double y_interface = grid.y_breaks[1];
    for (const homog::InterfaceSolution* s : {&sol.sol_x, &sol.sol_y}) {
        for (const double x : rx.points) {
            const double from_above = homog::evaluate_v_in_block(*s, grid, params, 1, 1, x,
                                                                 y_interface);
            const double from_below = homog::evaluate_v_in_block(*s, grid, params, 2, 1, x,
                                                                 y_interface);
            CHECK(std::abs(from_above - from_below) <= 1e-9);
        }
    }

    // Vertical interface between blocks (3, 3) and (3, 4) (crosses the
    // inclusion boundary).
    const homog::QuadratureRule ry = homog::midpoint_rule(grid.y_breaks[2], grid.y_breaks[3], 16);
    const double x_interface = grid.x_breaks[3];
    for (const double y : ry.points) {
        const double from_left =
            homog::evaluate_v_in_block(sol.sol_x, grid, params, 3, 3, x_interface, y);
        const double from_right =
            homog::evaluate_v_in_block(sol.sol_x, grid, params, 3, 4, x_interface, y);
        CHECK(std::abs(from_left - from_right) <= 1e-9);
    }

    // Periodic jump across the cell: for xi = x, v(x_n, y) - v(x_0, y) equals
    // the cell width; for xi = y it vanishes.
    const homog::QuadratureRule ry1 = homog::midpoint_rule(grid.y_breaks[0], grid.y_breaks[1], 16);
    for (const double y : ry1.points) {
        const double left_x = homog::evaluate_v_in_block(sol.sol_x, grid, params, 1, 1, grid.x0(), y);
        const double right_x =
            homog::evaluate_v_in_block(sol.sol_x, grid, params, 1, 8, grid.xn(), y);
        CHECK(std::abs(right_x - left_x - (grid.xn() - grid.x0())) <= 1e-9);
        const double left_y = homog::evaluate_v_in_block(sol.sol_y, grid, params, 1, 1, grid.x0(), y);
        const double right_y =
            homog::evaluate_v_in_block(sol.sol_y, grid, params, 1, 8, grid.xn(), y);
        CHECK(std::abs(right_y - left_y) <= 1e-9);
    }
}

TEST_CASE("the corrector has zero mean") {
    const BlockGrid grid = testcases::case1();
    const SolverParams params{8, 8, 13};
    const SaSolution sol = homog::sa_solve(grid, params);

    // Gauss-Legendre nodes on [0,1], mapped per block; enough nodes to
    // integrate the truncated series essentially exactly.
    constexpr std::size_t ng = 40;
    std::vector<double> gx(ng), gw(ng);
    {
        // Nodes via Newton on the Legendre polynomial.
        constexpr double pi = 3.14159265358979323846;
        for (std::size_t i = 0; i < ng; ++i) {
            double t = std::cos(pi * (static_cast<double>(i) + 0.75) / (ng + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = t;
                for (std::size_t k = 2; k <= ng; ++k) {
                    const double kd = static_cast<double>(k);
                    const double p2 = ((2.0 * kd - 1.0) * t * p1 - (kd - 1.0) * p0) / kd;
                    p0 = p1;
                    p1 = p2;
                }
                dp = static_cast<double>(ng) * (t * p1 - p0) / (t * t - 1.0);
                const double step = p1 / dp;
                t -= step;
                if (std::abs(step) < 1e-15) break;
            }
            gx[i] = 0.5 * (1.0 - t);  // descending roots; order is irrelevant
            gw[i] = 1.0 / ((1.0 - t * t) * dp * dp);
        }
    }

    for (const homog::InterfaceSolution* s : {&sol.sol_x, &sol.sol_y}) {
        double integral = 0.0;
        for (std::size_t i = 1; i <= grid.m; ++i) {
            for (std::size_t j = 1; j <= grid.n; ++j) {
                const double h = grid.h(i), l = grid.l(j);
                const double x0 = grid.x_breaks[j - 1], y0 = grid.y_breaks[i - 1];
                double block_sum = 0.0;
                for (std::size_t a = 0; a < ng; ++a) {
                    for (std::size_t b = 0; b < ng; ++b) {
                        block_sum += gw[a] * gw[b] *
                                     homog::evaluate_psi(*s, grid, params, x0 + l * gx[a],
                                                         y0 + h * gx[b]);
                    }
                }
                integral += block_sum * l * h;
            }
        }
        CHECK(std::abs(integral) <= 1e-9);
    }
}

TEST_CASE("tensor scales linearly with the diffusivity field") {
    const double c = 3.7;
    std::vector<double> d;
    for (const auto& row : testcases::case1_pattern())
        for (const char ch : row) d.push_back(ch == '#' ? 0.1 : 1.0);
    std::vector<double> d_scaled = d;
    for (double& v : d_scaled) v *= c;

    const SolverParams params{8, 8, 13};
    const EffectiveTensor t = homog::sa_effective_tensor(homog::new_uniform(8, 8, d), params);
    const EffectiveTensor tc =
        homog::sa_effective_tensor(homog::new_uniform(8, 8, d_scaled), params);
    CHECK(tc.d11 == doctest::Approx(c * t.d11).epsilon(1e-12));
    CHECK(tc.d22 == doctest::Approx(c * t.d22).epsilon(1e-12));
    CHECK(std::abs(tc.d12 - c * t.d12) <= 1e-12);
}

TEST_CASE("transposing the medium transposes the tensor") {
    // The Gamma layout has a nontrivial off-diagonal entry.
    const BlockGrid grid = testcases::case4();
    std::vector<double> d_t(64);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) d_t[j * 8 + i] = grid.D[i * 8 + j];
    const BlockGrid grid_t = homog::new_uniform(8, 8, d_t);

    const SolverParams params{8, 8, 13};
    const EffectiveTensor t = homog::sa_effective_tensor(grid, params);
    const EffectiveTensor tt = homog::sa_effective_tensor(grid_t, params);
    CHECK(tt.d11 == doctest::Approx(t.d22).epsilon(1e-10));
    CHECK(tt.d22 == doctest::Approx(t.d11).epsilon(1e-10));
    CHECK(tt.d12 == doctest::Approx(t.d21).epsilon(1e-10));
}

TEST_CASE("solved-system residuals are tiny") {
    const BlockGrid grid = testcases::case1();
    const SaSolution sol = homog::sa_solve(grid, {16, 16, 29});
    CHECK(sol.residual_norm_x <= 1e-12);
    CHECK(sol.residual_norm_y <= 1e-12);
}

TEST_CASE("a single uniform block is already its own homogenization") {
    const BlockGrid grid = homog::new_uniform(1, 1, {0.1});
    const EffectiveTensor t = homog::sa_effective_tensor(grid, {4, 4, 5});
    CHECK(t.d11 == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(t.d22 == doctest::Approx(0.1).epsilon(1e-12));
}

#include "homog/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace homog {

BlockGrid checkerboard(std::size_t m, double low, double high) {
    if (m < 2) {
        throw std::invalid_argument("checkerboard: m must be at least 2");
    }
    std::vector<double> d(m * m);
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            d[(i - 1) * m + (j - 1)] = ((i + j) % 2 == 0) ? low : high;
        }
    }
    return new_uniform(m, m, d);
}

BlockGrid aggregate_random(const AggregationConfig& config) {
    const std::size_t m = config.m;
    if (m < 2) {
        throw std::invalid_argument("aggregate_random: m must be at least 2");
    }
    if (m % 2 != 0) {
        throw std::invalid_argument(
            "aggregate_random: m must be even so the phases split into equal halves");
    }
    if (!(config.low > 0.0) || !(config.high > 0.0)) {
        throw std::invalid_argument("aggregate_random: phase diffusivities must be positive");
    }

    // 53-bit uniform draws in [0, 1), row-major.
    std::mt19937_64 gen(config.seed);
    std::vector<double> field(m * m);
    for (double& v : field) {
        v = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    }

    // Periodic 9-point smoothing; weights sum to 1 (4/9 + 4/9 + 4/36), so a
    // constant field is a fixed point and the mean is conserved.
    const double w_c = 4.0 / 9.0, w_e = 1.0 / 9.0, w_d = 1.0 / 36.0;
    std::vector<double> next(m * m);
    auto at = [&](std::size_t i, std::size_t j) -> double {
        return field[((i + m) % m) * m + ((j + m) % m)];
    };
    for (std::size_t pass = 0; pass < config.iterations; ++pass) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                next[i * m + j] = w_c * at(i, j) +
                                  w_e * (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1)) +
                                  w_d * (at(i - 1, j - 1) + at(i - 1, j + 1) + at(i + 1, j - 1) +
                                         at(i + 1, j + 1));
            }
        }
        field.swap(next);
    }

    // The largest m^2/2 values get the high phase; ties resolve to the
    // earlier (i,j) in row-major order so the split is deterministic.
    std::vector<std::size_t> order(m * m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (field[a] != field[b]) return field[a] > field[b];
        return a < b;
    });
    std::vector<double> d(m * m, config.low);
    for (std::size_t r = 0; r < m * m / 2; ++r) {
        d[order[r]] = config.high;
    }
    return new_uniform(m, m, d);
}

BlockGrid pixelate(const BlockGrid& fine, std::size_t r, double low, double high,
                   double threshold) {
    const std::size_t m = fine.m;
    if (fine.n != m) {
        throw std::invalid_argument("pixelate: fine grid must be square (m x m)");
    }
    if (r < 1 || m % r != 0) {
        std::ostringstream msg;
        msg << "pixelate: r=" << r << " does not divide the fine grid size m=" << m;
        throw std::invalid_argument(msg.str());
    }
    const double tol_x = 1e-12 * fine.width(), tol_y = 1e-12 * fine.height();
    for (std::size_t j = 1; j <= m; ++j) {
        if (std::abs(fine.l(j) - fine.l(1)) > tol_x) {
            throw std::invalid_argument("pixelate: fine grid blocks must be uniformly sized");
        }
    }
    for (std::size_t i = 1; i <= m; ++i) {
        if (std::abs(fine.h(i) - fine.h(1)) > tol_y) {
            throw std::invalid_argument("pixelate: fine grid blocks must be uniformly sized");
        }
    }
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const double v = fine.d(i, j);
            if (v != low && v != high) {
                std::ostringstream msg;
                msg << "pixelate: value " << v << " at block (" << i << "," << j
                    << ") is neither the low nor the high phase";
                throw std::invalid_argument(msg.str());
            }
        }
    }

    const std::size_t k = m / r;
    std::vector<double> d(r * r);
    for (std::size_t ci = 1; ci <= r; ++ci) {
        for (std::size_t cj = 1; cj <= r; ++cj) {
            double sum = 0.0;
            for (std::size_t di = 1; di <= k; ++di) {
                for (std::size_t dj = 1; dj <= k; ++dj) {
                    sum += fine.d((ci - 1) * k + di, (cj - 1) * k + dj);
                }
            }
            const double mean = sum / static_cast<double>(k * k);
            d[(ci - 1) * r + (cj - 1)] = (mean >= threshold) ? high : low;
        }
    }
    return new_uniform(r, r, d, fine.x0(), fine.xn(), fine.y0(), fine.ym());
}

}  // namespace homog

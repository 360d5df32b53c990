#include "homog/grid.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace homog {

BlockGrid new_uniform(std::size_t m, std::size_t n, const std::vector<double>& D,
                      double x0, double xn, double y0, double ym) {
    if (m < 1 || n < 1) throw std::invalid_argument("grid: m and n must be at least 1");
    if (!(xn > x0) || !(ym > y0)) throw std::invalid_argument("grid: degenerate extents");
    if (D.size() != m * n) throw std::invalid_argument("grid: D must have m*n entries");
    for (double v : D)
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("grid: diffusivities must be positive and finite");

    BlockGrid g;
    g.m = m;
    g.n = n;
    g.D = D;
    g.x_breaks.resize(n + 1);
    g.y_breaks.resize(m + 1);
    const double dx = (xn - x0) / static_cast<double>(n);
    const double dy = (ym - y0) / static_cast<double>(m);
    for (std::size_t j = 0; j <= n; ++j) g.x_breaks[j] = x0 + static_cast<double>(j) * dx;
    for (std::size_t i = 0; i <= m; ++i) g.y_breaks[i] = y0 + static_cast<double>(i) * dy;
    g.x_breaks[n] = xn;  // exact endpoints regardless of rounding in the increments
    g.y_breaks[m] = ym;
    return g;
}

namespace {

// Index of the interval containing c in breaks; ties resolve to the
// greater-coordinate side, except the last break which closes the domain.
std::size_t interval_of(const std::vector<double>& breaks, double c) {
    const std::size_t count = breaks.size() - 1;
    if (c < breaks.front() || c > breaks.back()) throw std::out_of_range("block_of: point outside domain");
    for (std::size_t k = 1; k < count; ++k)
        if (c < breaks[k]) return k;
    return count;
}

}  // namespace

std::pair<std::size_t, std::size_t> block_of(const BlockGrid& grid, double x, double y) {
    return {interval_of(grid.y_breaks, y), interval_of(grid.x_breaks, x)};
}

std::vector<std::string> validate(const BlockGrid& grid) {
    std::vector<std::string> violations;
    auto report = [&violations](const std::string& msg) { violations.push_back(msg); };

    if (grid.m < 1 || grid.n < 1) report("grid must have at least one row and one column");
    if (grid.x_breaks.size() != grid.n + 1) report("x_breaks must have n+1 entries");
    if (grid.y_breaks.size() != grid.m + 1) report("y_breaks must have m+1 entries");
    if (grid.D.size() != grid.m * grid.n) report("D must have m*n entries");

    auto check_breaks = [&report](const std::vector<double>& breaks, const char* name) {
        for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
            if (!(breaks[k + 1] > breaks[k])) {
                std::ostringstream oss;
                oss << "non-increasing breakpoint in " << name << " at index " << k + 1;
                report(oss.str());
            }
        }
        for (double b : breaks)
            if (!std::isfinite(b)) {
                report(std::string("non-finite breakpoint in ") + name);
                break;
            }
    };
    check_breaks(grid.x_breaks, "x_breaks");
    check_breaks(grid.y_breaks, "y_breaks");

    if (grid.D.size() == grid.m * grid.n) {
        for (std::size_t i = 1; i <= grid.m; ++i)
            for (std::size_t j = 1; j <= grid.n; ++j) {
                const double v = grid.D[(i - 1) * grid.n + (j - 1)];
                if (!(v > 0.0) || !std::isfinite(v)) {
                    std::ostringstream oss;
                    oss << "non-positive diffusivity at (" << i << "," << j << ")";
                    report(oss.str());
                }
            }
    }
    return violations;
}

}  // namespace homog

// ============================================================================
// homog/grid.hpp
//
// Data model for a rectangular unit cell tiled by an m-by-n array of blocks,
// each carrying a constant isotropic diffusivity D_{i,j}.  Block (i,j), with
// 1-based indices, occupies [x_{j-1}, x_j] x [y_{i-1}, y_i]; row index i runs
// along y, column index j along x.  Input files list row 1 first; renderers
// draw row 1 at the top (image convention).
// ============================================================================
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace homog {

// The unit cell: strictly increasing breakpoints and per-block diffusivities.
// Immutable after construction; safe to share across threads.
struct BlockGrid {
    std::size_t m = 0;  // block rows (y direction)
    std::size_t n = 0;  // block columns (x direction)
    std::vector<double> x_breaks;  // x_0 .. x_n, strictly increasing
    std::vector<double> y_breaks;  // y_0 .. y_m, strictly increasing
    std::vector<double> D;         // row-major m*n, D[(i-1)*n + (j-1)] = D_{i,j}

    // Accessors use the 1-based block indices of the mathematical model.
    double d(std::size_t i, std::size_t j) const { return D[(i - 1) * n + (j - 1)]; }
    double h(std::size_t i) const { return y_breaks[i] - y_breaks[i - 1]; }  // block row height
    double l(std::size_t j) const { return x_breaks[j] - x_breaks[j - 1]; }  // block column width
    double x0() const { return x_breaks.front(); }
    double xn() const { return x_breaks.back(); }
    double y0() const { return y_breaks.front(); }
    double ym() const { return y_breaks.back(); }
    double width() const { return xn() - x0(); }
    double height() const { return ym() - y0(); }
    double area() const { return width() * height(); }
    double block_area(std::size_t i, std::size_t j) const { return h(i) * l(j); }
};

// Equispaced breakpoints on [x0,xn] x [y0,ym]; D given row-major (row 1 first).
// Throws std::invalid_argument on non-positive diffusivities or degenerate
// extents.
BlockGrid new_uniform(std::size_t m, std::size_t n, const std::vector<double>& D,
                      double x0 = 0.0, double xn = 1.0, double y0 = 0.0, double ym = 1.0);

// Indices (i,j) of the block containing the point.  Points exactly on an
// interior breakpoint resolve to the greater-coordinate side (half-open
// tiling); the domain's far edges belong to the last block.  Throws
// std::out_of_range for points outside the closed domain.
std::pair<std::size_t, std::size_t> block_of(const BlockGrid& grid, double x, double y);

// All invariant violations, as human-readable messages; empty iff the grid is
// valid.  Reports rather than throws.
std::vector<std::string> validate(const BlockGrid& grid);

}  // namespace homog

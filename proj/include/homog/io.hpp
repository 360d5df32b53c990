// ============================================================================
// homog/io.hpp
//
// File formats and serialization:
//   * grid CSV:  m lines of n comma-separated positive diffusivities,
//                implying a unit-square domain with equal blocks;
//   * grid JSON: {"x": [x_0..x_n], "y": [y_0..y_m], "D": [[row 1], ...]},
//                supporting non-uniform breakpoints;
//   * ResultDocument JSON/CSV: solver output with tensor, eigen summary,
//                residuals, timing, and a content hash of the grid;
//   * PGM (P5):  grayscale rendering, darker = lower diffusivity, block
//                row 1 at the top.
//
// Numbers serialize with 17 significant digits so doubles round-trip
// losslessly, and all emission is hand-rolled so identical inputs produce
// byte-identical outputs (golden-file friendly).  Filesystem failures throw
// IoError; malformed content throws std::invalid_argument.
// ============================================================================
#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "homog/analysis.hpp"
#include "homog/grid.hpp"
#include "homog/tensor.hpp"

namespace homog {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// %.17g rendering used for every serialized floating-point number.
// Throws std::invalid_argument for non-finite values.
std::string format_double(double v);

BlockGrid read_grid_csv(std::istream& in);
BlockGrid read_grid_json(std::istream& in);
// Dispatches on the file extension (.csv or .json).
BlockGrid read_grid(const std::string& path);

// CSV can only represent unit-square grids with equal blocks; anything else
// throws std::invalid_argument (use JSON for general grids).
void write_grid_csv(const BlockGrid& grid, std::ostream& out);
void write_grid_json(const BlockGrid& grid, std::ostream& out);
void write_grid(const BlockGrid& grid, const std::string& path);

// Compact single-line JSON serialization of the grid; the basis of the
// grid_sha256 digest, independent of which file format carried the grid.
std::string canonical_grid_json(const BlockGrid& grid);

struct ResultDocument {
    std::string method;  // "sa" or "fvm"
    std::vector<std::pair<std::string, std::size_t>> params;  // emitted in order
    EffectiveTensor tensor;
    PrincipalDecomposition eigen;  // of the symmetrized tensor
    std::string grid_sha256;
    bool include_timing = true;  // false omits wall_time_s (golden tests)
};

// {"method", "params":{...}, "tensor":[[..],[..]], "eigenvalues":[..],
//  "angle_deg", "residual_norm":{"x","y"}, "wall_time_s", "grid_sha256"}
std::string to_json(const ResultDocument& doc);
std::string to_csv(const ResultDocument& doc);
ResultDocument result_from_json(const std::string& text);

// Binary PGM (P5); every block becomes a scale x scale pixel patch with gray
// level round(255 * D / max D).
void write_pgm(const BlockGrid& grid, std::ostream& out, std::size_t scale = 1);
void write_pgm(const BlockGrid& grid, const std::string& path, std::size_t scale = 1);

}  // namespace homog

// ============================================================================
// homog/geometry.hpp
//
// Generators and transformers for test geometries on the unit square:
//   * checkerboard   - alternating two-phase pattern, low phase in the top
//                      left corner;
//   * aggregate_random - random two-phase aggregates built by smoothing a
//                      uniform random field with a periodic 9-point kernel
//                      and thresholding to equal phase fractions;
//   * pixelate       - down-sample a fine binary grid to r x r by patch
//                      averaging against a threshold.
//
// All generators are deterministic: aggregate_random uses a fixed, portable
// PRNG (mt19937_64) and a documented draw order so the same seed yields the
// same grid on every platform.
// ============================================================================
#pragma once

#include <cstddef>
#include <cstdint>

#include "homog/grid.hpp"

namespace homog {

struct AggregationConfig {
    std::size_t m = 0;           // grid size (must be even so m^2/2 is integral)
    std::size_t iterations = 0;  // smoothing passes
    std::uint64_t seed = 0;
    double low = 0.1;
    double high = 1.0;
};

// m x m two-phase checkerboard on the unit square: D_{i,j} = low when (i+j)
// is even, so block (1,1) (drawn top left) carries the low phase.
// Throws std::invalid_argument for m < 2 or non-positive phase values.
BlockGrid checkerboard(std::size_t m, double low, double high);

// Random aggregated medium on the unit square:
//   1. draw m^2 uniform(0,1) values row-major from mt19937_64(seed), each
//      value built from the top 53 bits of one draw;
//   2. apply `iterations` passes of the periodic 9-point smoothing with
//      weights 4/9 (centre), 1/9 (edge neighbours), 1/36 (corner neighbours);
//   3. assign the largest m^2/2 values the high phase and the rest the low
//      phase, breaking ties by (i,j) lexicographic order.
// Throws std::invalid_argument for invalid config (including odd m).
BlockGrid aggregate_random(const AggregationConfig& config);

// Down-samples a uniform m x m binary grid (values exactly in {low, high})
// to r x r, where r divides m: each coarse cell covers a k x k patch
// (k = m/r) and becomes the high phase iff the patch mean diffusivity is
// >= threshold.  At r = m this is the identity on binary grids whenever
// low < threshold <= high.  Throws std::invalid_argument on violated
// preconditions.
BlockGrid pixelate(const BlockGrid& fine, std::size_t r, double low, double high,
                   double threshold = 0.55);

}  // namespace homog

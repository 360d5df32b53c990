// ============================================================================
// homog/quadrature.hpp
//
// Composite midpoint rule used for every interface-flux integral in the
// semi-analytical solver.  The midpoint rule is the one rule that satisfies
// all of the method's constraints at once: no abscissa touches a block
// vertex, the same abscissas serve every cosine frequency, the rule is a
// plain linear functional of the samples, and the resulting interface-flux
// matrix stays full-rank whenever the series-truncation window holds.
//
// A useful exactness property (tested, and the root of the truncation upper
// bound): with N midpoints on [a,b], the rule integrates
// cos(k*pi*(x-a)/(b-a)) to exactly 0 for every k >= 1 that is not a multiple
// of 2N, since the midpoint cosine sum telescopes to sin(k*pi)/(2*sin(k*pi/2N)).
// ============================================================================
#pragma once

#include <cstddef>
#include <vector>

namespace homog {

// Midpoint abscissas and weights on one interval.  Immutable value type.
struct QuadratureRule {
    double a = 0.0, b = 0.0;       // interval
    std::vector<double> points;    // strictly increasing, none at a or b
    std::vector<double> weights;   // all (b-a)/N; sum is the interval length
    std::size_t size() const { return points.size(); }
};

// points_p = a + (p - 1/2)(b-a)/N for p = 1..N.  Throws std::invalid_argument
// for N < 2 or a degenerate interval.
QuadratureRule midpoint_rule(double a, double b, std::size_t N);

// Sum_p w_p * samples_p.  Throws std::invalid_argument on length mismatch.
double apply(const QuadratureRule& rule, const std::vector<double>& samples);

}  // namespace homog

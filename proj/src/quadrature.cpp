#include "homog/quadrature.hpp"

#include <stdexcept>

namespace homog {

QuadratureRule midpoint_rule(double a, double b, std::size_t N) {
    if (N < 2) throw std::invalid_argument("midpoint_rule: N must be at least 2");
    if (!(b > a)) throw std::invalid_argument("midpoint_rule: degenerate interval");
    QuadratureRule rule;
    rule.a = a;
    rule.b = b;
    rule.points.resize(N);
    rule.weights.assign(N, (b - a) / static_cast<double>(N));
    for (std::size_t p = 1; p <= N; ++p)
        rule.points[p - 1] = a + (static_cast<double>(p) - 0.5) * (b - a) / static_cast<double>(N);
    return rule;
}

double apply(const QuadratureRule& rule, const std::vector<double>& samples) {
    if (samples.size() != rule.size())
        throw std::invalid_argument("apply: sample count does not match rule size");
    double acc = 0.0;
    for (std::size_t p = 0; p < samples.size(); ++p) acc += rule.weights[p] * samples[p];
    return acc;
}

}  // namespace homog

#include "cgap/quadrature.hpp"

#include "cgap/errors.hpp"

#include <cmath>
#include <numbers>

namespace cgap {

QuadratureRule QuadratureRule::uniform_angle(std::size_t m)
{
  if (m < 2) throw DomainError("quadrature needs at least 2 nodes");
  QuadratureRule rule;
  rule.kind = QuadratureKind::UniformAngle;
  rule.nodes.resize(m);
  rule.weights.assign(m, 1.0 / static_cast<double>(m));
  for (std::size_t k = 0; k < m; ++k)
    rule.nodes[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
  return rule;
}

QuadratureRule QuadratureRule::interval_gauss(std::size_t q)
{
  if (q < 2) throw DomainError("quadrature needs at least 2 nodes");
  QuadratureRule rule;
  rule.kind = QuadratureKind::IntervalGauss;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  const double n = static_cast<double>(q);
  // Newton iteration on P_q from the usual cosine initial guesses; roots are
  // symmetric so only half are computed.
  for (std::size_t k = 0; k < (q + 1) / 2; ++k) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(k) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t j = 2; j <= q; ++j) {
        const double jd = static_cast<double>(j);
        const double p2 = ((2.0 * jd - 1.0) * x * p1 - (jd - 1.0) * p0) / jd;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1, 1] -> [0, 1]; weights halve so they sum to 1
    rule.nodes[k] = 0.5 * (1.0 - x);
    rule.nodes[q - 1 - k] = 0.5 * (1.0 + x);
    rule.weights[k] = rule.weights[q - 1 - k] = 0.5 * w;
  }
  return rule;
}

}  // namespace cgap

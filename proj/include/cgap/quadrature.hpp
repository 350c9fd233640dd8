#pragma once

#include <cstddef>
#include <vector>

namespace cgap {

enum class QuadratureKind { UniformAngle, IntervalGauss };

/// Normalized quadrature rule: weights sum to 1 in both kinds.
///  - UniformAngle: M equally spaced angles 2 pi k / M; exact for trigonometric
///    polynomials of degree < M.
///  - IntervalGauss: q-point Gauss-Legendre on [0, 1]; exact for polynomials of
///    degree <= 2q - 1. Callers rescale nodes to [0, s].
struct QuadratureRule
{
  QuadratureKind kind = QuadratureKind::UniformAngle;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  static QuadratureRule uniform_angle(std::size_t m = 64);
  static QuadratureRule interval_gauss(std::size_t q = 16);
};

}  // namespace cgap

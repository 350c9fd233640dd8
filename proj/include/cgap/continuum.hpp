#pragma once

#include "cgap/generator.hpp"
#include "cgap/quadrature.hpp"
#include "cgap/rational.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cgap {

/// Point of the sphere sum(eta_i^2) = omega.
struct SpherePoint
{
  std::vector<double> eta;
  double omega = 1.0;

  /// Throws DomainError unless |sum eta_i^2 - omega| < 1e-10.
  static SpherePoint make(std::vector<double> eta, double omega);
};

/// Point of the simplex eta_i >= 0, sum(eta_i) = omega.
struct SimplexPoint
{
  std::vector<double> eta;
  double omega = 1.0;

  static SimplexPoint make(std::vector<double> eta, double omega);
};

using PointFunction = std::function<double(std::span<const double>)>;

/// E_b f(eta): average of f over rotations in the (eta_i, eta_j) plane.
double pair_average_kac(const PointFunction& f, Pair b, const SpherePoint& eta,
                        const QuadratureRule& rule);
/// L f(eta) = (1/N) sum_b [E_b f(eta) - f(eta)] on the sphere.
double generator_apply_kac(const PointFunction& f, const SpherePoint& eta, const QuadratureRule& rule);

/// E_b f(eta): f averaged over uniform redistributions of s = eta_i + eta_j.
double pair_average_flat(const PointFunction& f, Pair b, const SimplexPoint& eta,
                         const QuadratureRule& rule);
double generator_apply_flat(const PointFunction& f, const SimplexPoint& eta, const QuadratureRule& rule);

/// nu[eta_1^2 | eta_2] on the N = 3, omega = 1 simplex.
double conditional_second_moment_flat(double eta2);
/// Same quantity by quadrature over the conditional law of eta_1 given eta_2.
double conditional_second_moment_flat_quadrature(double eta2, const QuadratureRule& rule);

/// K phi(a) = nu[phi(eta_2) | eta_1 = a] on the N = 3, omega = 1 simplex, acting on
/// polynomial coefficients {1, a, ..., a^n_max}. Column k holds K a^k = (1-a)^k/(k+1).
struct KOperatorMatrix
{
  std::size_t n_max = 0;
  Eigen::MatrixXd matrix;

  Eigen::VectorXd apply(const Eigen::VectorXd& coefficients) const { return matrix * coefficients; }
  /// Eigenvalues from a general (non-symmetric) eigensolve, sorted by degree.
  std::vector<double> eigenvalues() const;
};

KOperatorMatrix k_operator_matrix(std::size_t n_max);

/// Exact eigenvalue (-1)^n/(n+1) of K.
Rational k_operator_eigenvalue(std::size_t n);

/// Lower bound (1/3) min{2 + mu1, 2 - 2 mu2} on the three-component gap.
double gap3_bound_from_mu(double mu1, double mu2);
Rational gap3_bound_from_mu(const Rational& mu1, const Rational& mu2);

/// Uniform points on the sphere of radius sqrt(omega): normalized Gaussian vectors.
std::vector<SpherePoint> random_sphere_points(std::size_t n, double omega, std::size_t count,
                                              std::uint64_t seed);
/// Uniform points on the simplex of mass omega: normalized exponential vectors.
std::vector<SimplexPoint> random_simplex_points(std::size_t n, double omega, std::size_t count,
                                                std::uint64_t seed);

/// Least-squares fit y = slope * x + intercept.
struct AffineFit
{
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  std::size_t points = 0;
};

AffineFit affine_fit(std::span<const double> x, std::span<const double> y);

/// Regress L f against f over the given points; slope is minus the eigenvalue when
/// f is an eigenfunction up to an additive constant.
AffineFit eigenfunction_fit_kac(const PointFunction& f, std::span<const SpherePoint> points,
                                const QuadratureRule& rule);
AffineFit eigenfunction_fit_flat(const PointFunction& f, std::span<const SimplexPoint> points,
                                 const QuadratureRule& rule);

/// sum_i eta_i^power
PointFunction power_sum(int power);

}  // namespace cgap

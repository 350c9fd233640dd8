#include "cgap/continuum.hpp"

#include "cgap/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cgap {

namespace {

void check_pair(Pair b, std::size_t n)
{
  if (b.i == b.j) throw InvalidPairError("pair needs two distinct sites");
  if (b.i >= n || b.j >= n) throw InvalidPairError("pair site out of range");
}

void require_kind(const QuadratureRule& rule, QuadratureKind kind)
{
  if (rule.kind != kind)
    throw DomainError(kind == QuadratureKind::UniformAngle ? "expected a uniform-angle rule"
                                                           : "expected an interval Gauss rule");
}

}  // namespace

SpherePoint SpherePoint::make(std::vector<double> eta, double omega)
{
  const double r2 = std::inner_product(eta.begin(), eta.end(), eta.begin(), 0.0);
  if (!(omega > 0.0) || std::abs(r2 - omega) >= 1e-10)
    throw DomainError("point is not on the sphere of radius^2 " + std::to_string(omega));
  return {std::move(eta), omega};
}

SimplexPoint SimplexPoint::make(std::vector<double> eta, double omega)
{
  const double mass = std::accumulate(eta.begin(), eta.end(), 0.0);
  if (!(omega > 0.0) || std::abs(mass - omega) >= 1e-10 ||
      std::any_of(eta.begin(), eta.end(), [](double v) { return v < 0.0; }))
    throw DomainError("point is not on the simplex of mass " + std::to_string(omega));
  return {std::move(eta), omega};
}

double pair_average_kac(const PointFunction& f, Pair b, const SpherePoint& eta, const QuadratureRule& rule)
{
  check_pair(b, eta.eta.size());
  require_kind(rule, QuadratureKind::UniformAngle);
  std::vector<double> x = eta.eta;
  const double a = eta.eta[b.i], c = eta.eta[b.j];
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double cs = std::cos(rule.nodes[k]), sn = std::sin(rule.nodes[k]);
    x[b.i] = a * cs + c * sn;  // clockwise rotation by theta
    x[b.j] = -a * sn + c * cs;
    acc += rule.weights[k] * f(x);
  }
  return acc;
}

double generator_apply_kac(const PointFunction& f, const SpherePoint& eta, const QuadratureRule& rule)
{
  const double here = f(eta.eta);
  double acc = 0.0;
  for (const Pair& b : all_pairs(eta.eta.size())) acc += pair_average_kac(f, b, eta, rule) - here;
  return acc / static_cast<double>(eta.eta.size());
}

double pair_average_flat(const PointFunction& f, Pair b, const SimplexPoint& eta, const QuadratureRule& rule)
{
  check_pair(b, eta.eta.size());
  require_kind(rule, QuadratureKind::IntervalGauss);
  const double s = eta.eta[b.i] + eta.eta[b.j];
  if (s == 0.0) return f(eta.eta);
  std::vector<double> x = eta.eta;
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    x[b.i] = s * rule.nodes[k];
    x[b.j] = s - x[b.i];
    acc += rule.weights[k] * f(x);
  }
  return acc;
}

double generator_apply_flat(const PointFunction& f, const SimplexPoint& eta, const QuadratureRule& rule)
{
  const double here = f(eta.eta);
  double acc = 0.0;
  for (const Pair& b : all_pairs(eta.eta.size())) acc += pair_average_flat(f, b, eta, rule) - here;
  return acc / static_cast<double>(eta.eta.size());
}

double conditional_second_moment_flat(double eta2)
{
  if (!(eta2 >= 0.0 && eta2 <= 1.0)) throw DomainError("eta_2 must lie in [0, 1]");
  return (eta2 * eta2 - 2.0 * eta2 + 1.0) / 3.0;
}

double conditional_second_moment_flat_quadrature(double eta2, const QuadratureRule& rule)
{
  if (!(eta2 >= 0.0 && eta2 <= 1.0)) throw DomainError("eta_2 must lie in [0, 1]");
  require_kind(rule, QuadratureKind::IntervalGauss);
  // Given eta_2, eta_1 is uniform on [0, 1 - eta_2] (eta_3 fills the rest).
  const double len = 1.0 - eta2;
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double u = len * rule.nodes[k];
    acc += rule.weights[k] * u * u;
  }
  return acc;
}

// ---------------------------------------------------------------------------

std::vector<double> KOperatorMatrix::eigenvalues() const
{
  Eigen::EigenSolver<Eigen::MatrixXd> es(matrix, false);
  std::vector<double> out;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) out.push_back(es.eigenvalues()(k).real());
  std::sort(out.begin(), out.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  return out;
}

KOperatorMatrix k_operator_matrix(std::size_t n_max)
{
  if (n_max < 1) throw DomainError("K operator needs degree bound >= 1");
  const auto dim = static_cast<Eigen::Index>(n_max + 1);
  KOperatorMatrix k{n_max, Eigen::MatrixXd::Zero(dim, dim)};
  for (Eigen::Index col = 0; col < dim; ++col) {
    double binom = 1.0;  // C(col, row)
    for (Eigen::Index row = 0; row <= col; ++row) {
      k.matrix(row, col) = (row % 2 == 0 ? 1.0 : -1.0) * binom / static_cast<double>(col + 1);
      binom = binom * static_cast<double>(col - row) / static_cast<double>(row + 1);
    }
  }
  return k;
}

Rational k_operator_eigenvalue(std::size_t n)
{
  return Rational(n % 2 == 0 ? 1 : -1, static_cast<long long>(n + 1));
}

double gap3_bound_from_mu(double mu1, double mu2)
{
  if (!(mu1 <= mu2) || mu1 < -1.0 || mu2 > 1.0) throw DomainError("need -1 <= mu1 <= mu2 <= 1");
  return std::min(2.0 + mu1, 2.0 - 2.0 * mu2) / 3.0;
}

Rational gap3_bound_from_mu(const Rational& mu1, const Rational& mu2)
{
  if (!(mu1 <= mu2) || mu1 < Rational(-1) || mu2 > Rational(1)) throw DomainError("need -1 <= mu1 <= mu2 <= 1");
  return std::min(Rational(2) + mu1, Rational(2) - Rational(2) * mu2) / Rational(3);
}

// ---------------------------------------------------------------------------

std::vector<SpherePoint> random_sphere_points(std::size_t n, double omega, std::size_t count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<SpherePoint> out;
  out.reserve(count);
  const double radius = std::sqrt(omega);
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<double> x(n);
    for (double& v : x) v = normal(rng);
    const double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    for (double& v : x) v *= radius / norm;
    out.push_back({std::move(x), omega});
  }
  return out;
}

std::vector<SimplexPoint> random_simplex_points(std::size_t n, double omega, std::size_t count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<SimplexPoint> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<double> x(n);
    for (double& v : x) v = expo(rng);
    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    for (double& v : x) v *= omega / total;
    out.push_back({std::move(x), omega});
  }
  return out;
}

AffineFit affine_fit(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size()) throw ShapeError("affine fit needs equally long samples");
  if (x.size() < 2) throw DomainError("affine fit needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("affine fit needs non-constant abscissae");
  AffineFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t k = 0; k < x.size(); ++k)
    fit.max_residual = std::max(fit.max_residual, std::abs(y[k] - fit.slope * x[k] - fit.intercept));
  return fit;
}

AffineFit eigenfunction_fit_kac(const PointFunction& f, std::span<const SpherePoint> points,
                                const QuadratureRule& rule)
{
  std::vector<double> fx, lfx;
  for (const auto& p : points) {
    fx.push_back(f(p.eta));
    lfx.push_back(generator_apply_kac(f, p, rule));
  }
  return affine_fit(fx, lfx);
}

AffineFit eigenfunction_fit_flat(const PointFunction& f, std::span<const SimplexPoint> points,
                                 const QuadratureRule& rule)
{
  std::vector<double> fx, lfx;
  for (const auto& p : points) {
    fx.push_back(f(p.eta));
    lfx.push_back(generator_apply_flat(f, p, rule));
  }
  return affine_fit(fx, lfx);
}

PointFunction power_sum(int power)
{
  return [power](std::span<const double> eta) {
    double acc = 0.0;
    for (double v : eta) acc += std::pow(v, power);
    return acc;
  };
}

}  // namespace cgap

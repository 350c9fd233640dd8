#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cgap/continuum.hpp"
#include "cgap/errors.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace cgap;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

double double_factorial(int n) { return n <= 1 ? 1.0 : n * double_factorial(n - 2); }

// Mean of cos^a sin^c over the circle.
double circle_moment(int a, int c)
{
  if (a % 2 || c % 2) return 0.0;
  return double_factorial(a - 1) * double_factorial(c - 1) / double_factorial(a + c);
}

// Mean of u^a (s-u)^c for u uniform on [0, s].
double interval_moment(int a, int c, double s)
{
  return std::pow(s, a + c) * factorial(a) * factorial(c) / factorial(a + c + 1);
}

PointFunction monomial(std::size_t i, int a, std::size_t j, int c)
{
  return [=](std::span<const double> x) { return std::pow(x[i], a) * std::pow(x[j], c); };
}

SpherePoint sphere_point(std::vector<double> eta)
{
  const double r2 = std::inner_product(eta.begin(), eta.end(), eta.begin(), 0.0);
  return SpherePoint::make(std::move(eta), r2);
}

}  // namespace

TEST_CASE("quadrature rules")
{
  const auto a = QuadratureRule::uniform_angle(64), g = QuadratureRule::interval_gauss(16);
  CHECK(a.size() == 64);
  CHECK(g.size() == 16);
  CHECK(std::abs(std::accumulate(a.weights.begin(), a.weights.end(), 0.0) - 1.0) < 1e-15);
  CHECK(std::abs(std::accumulate(g.weights.begin(), g.weights.end(), 0.0) - 1.0) < 1e-14);
  for (double x : g.nodes) CHECK((x > 0.0 && x < 1.0));
  CHECK_THROWS_AS(QuadratureRule::uniform_angle(1), DomainError);
  CHECK_THROWS_AS(QuadratureRule::interval_gauss(1), DomainError);
}

TEST_CASE("points on the constraint surfaces")
{
  CHECK_THROWS_AS(SpherePoint::make({1.0, 1.0}, 1.0), DomainError);
  CHECK_THROWS_AS(SimplexPoint::make({0.5, 0.6}, 1.0), DomainError);
  CHECK_THROWS_AS(SimplexPoint::make({-0.5, 1.5}, 1.0), DomainError);
  for (const auto& p : random_sphere_points(5, 4.0, 50, 3)) {
    double r2 = 0.0;
    for (double x : p.eta) r2 += x * x;
    CHECK(std::abs(r2 - 4.0) < 1e-12);
  }
  for (const auto& p : random_simplex_points(4, 2.0, 50, 3)) {
    double s = 0.0;
    for (double x : p.eta) {
      CHECK(x >= 0.0);
      s += x;
    }
    CHECK(std::abs(s - 2.0) < 1e-12);
  }
  CHECK(random_sphere_points(3, 1.0, 5, 9)[4].eta == random_sphere_points(3, 1.0, 5, 9)[4].eta);
}

TEST_CASE("rotation averages are exact for trigonometric polynomials")
{
  const auto rule = QuadratureRule::uniform_angle(64);
  const auto eta = sphere_point({0.3, -1.2, 0.7, 0.45});
  const Pair b = Pair::make(1, 3);
  const double r2 = eta.eta[1] * eta.eta[1] + eta.eta[3] * eta.eta[3];
  for (int a = 0; a <= 12; ++a)
    for (int c = 0; c <= 12 - a; ++c) {
      const double expected = std::pow(r2, 0.5 * (a + c)) * circle_moment(a, c);
      CHECK(std::abs(pair_average_kac(monomial(1, a, 3, c), b, eta, rule) - expected) < 1e-12);
    }
  // other coordinates are untouched
  const auto g = [](std::span<const double> x) { return x[0] * x[2]; };
  CHECK(std::abs(pair_average_kac(g, b, eta, rule) - 0.3 * 0.7) < 1e-15);
}

TEST_CASE("rotation average examples")
{
  const auto rule = QuadratureRule::uniform_angle(64);
  const auto eta = sphere_point({0.8, -0.6, 1.1});
  const Pair b = Pair::make(0, 2);
  const double xi = 0.8, xj = 1.1;
  const auto quad = [](std::span<const double> x) { return x[0] * x[0] + x[2] * x[2]; };
  const auto quart = [](std::span<const double> x) { return std::pow(x[0], 4) + std::pow(x[2], 4); };
  const auto lin = [](std::span<const double> x) { return x[0]; };
  CHECK(std::abs(pair_average_kac(quad, b, eta, rule) - (xi * xi + xj * xj)) < 1e-14);
  CHECK(std::abs(pair_average_kac(quart, b, eta, rule) - 0.75 * std::pow(xi * xi + xj * xj, 2)) < 1e-13);
  CHECK(std::abs(pair_average_kac(lin, b, eta, rule)) < 1e-15);
  CHECK_THROWS_AS(pair_average_kac(lin, Pair{1, 1}, eta, rule), InvalidPairError);
  CHECK_THROWS_AS(pair_average_kac(lin, b, eta, QuadratureRule::interval_gauss(8)), DomainError);
}

TEST_CASE("redistribution averages are exact for polynomials")
{
  const auto rule = QuadratureRule::interval_gauss(16);
  const auto eta = SimplexPoint::make({0.1, 0.25, 0.4, 0.25}, 1.0);
  const Pair b = Pair::make(0, 2);
  const double s = 0.5;
  for (int a = 0; a <= 15; ++a)
    for (int c = 0; c <= 31 - a && c <= 15; ++c) {
      const double expected = interval_moment(a, c, s);
      CHECK(std::abs(pair_average_flat(monomial(0, a, 2, c), b, eta, rule) - expected) < 1e-12);
    }
  const auto sum = [](std::span<const double> x) { return x[0] + x[2]; };
  const auto sq = [](std::span<const double> x) { return x[0] * x[0] + x[2] * x[2]; };
  const auto first = [](std::span<const double> x) { return x[0]; };
  CHECK(std::abs(pair_average_flat(sum, b, eta, rule) - s) < 1e-15);
  CHECK(std::abs(pair_average_flat(sq, b, eta, rule) - 2.0 / 3 * s * s) < 1e-15);
  CHECK(std::abs(pair_average_flat(first, b, eta, rule) - s / 2) < 1e-15);

  const auto edge = SimplexPoint::make({0.0, 1.0, 0.0}, 1.0);
  const auto h = [](std::span<const double> x) { return 7.0 + x[0] - x[2]; };
  CHECK(pair_average_flat(h, Pair::make(0, 2), edge, rule) == 7.0);
}

TEST_CASE("pair averages are projections")
{
  const auto arule = QuadratureRule::uniform_angle(64);
  const auto grule = QuadratureRule::interval_gauss(16);
  const auto f = [](std::span<const double> x) { return std::pow(x[0], 3) * x[1] + x[1] * x[2] * x[2] + x[0]; };
  const Pair b = Pair::make(0, 1);
  for (const auto& p : random_sphere_points(3, 1.0, 20, 4)) {
    const auto once = [&](std::span<const double> x) {
      return pair_average_kac(f, b, sphere_point({x.begin(), x.end()}), arule);
    };
    CHECK(std::abs(pair_average_kac(once, b, p, arule) - once(p.eta)) < 1e-12);
  }
  for (const auto& p : random_simplex_points(3, 1.0, 20, 4)) {
    const auto once = [&](std::span<const double> x) {
      return pair_average_flat(f, b, SimplexPoint::make({x.begin(), x.end()}, 1.0), grule);
    };
    CHECK(std::abs(pair_average_flat(once, b, p, grule) - once(p.eta)) < 1e-12);
  }
}

TEST_CASE("simplex scale covariance")
{
  const auto rule = QuadratureRule::interval_gauss(16);
  const auto f = [](std::span<const double> x) { return x[0] * x[0] * x[1] + 2 * x[1] * x[1] * x[1] - x[2]; };
  const double w = 1.0, w2 = 3.5;
  for (const auto& p : random_simplex_points(3, w, 20, 5)) {
    std::vector<double> scaled = p.eta;
    for (double& x : scaled) x *= w2 / w;
    const auto q = SimplexPoint::make(scaled, w2);
    const auto f_scaled = [&](std::span<const double> x) {
      std::vector<double> y(x.begin(), x.end());
      for (double& v : y) v *= w2 / w;
      return f(y);
    };
    for (const auto& b : all_pairs(3))
      CHECK(std::abs(pair_average_flat(f, b, q, rule) - pair_average_flat(f_scaled, b, p, rule)) < 1e-10);
  }
}

TEST_CASE("Kac sphere eigenfunction")
{
  const auto rule = QuadratureRule::uniform_angle(64);
  for (std::size_t n = 3; n <= 6; ++n) {
    const double nn = double(n);
    double slope_at_one = 0.0;
    for (double w : {1.0, 4.0}) {
      const auto pts = random_sphere_points(n, w, 1000, 17 + n);
      const auto fit = eigenfunction_fit_kac(power_sum(4), pts, rule);
      CHECK(std::abs(fit.slope + (nn + 2) / (4 * nn)) < 1e-10);
      CHECK(std::abs(fit.intercept - 3 * w * w / (4 * nn)) < 1e-10 * w * w);
      CHECK(fit.max_residual < 1e-10 * w * w);
      CHECK(fit.points == 1000);
      if (w == 1.0) slope_at_one = fit.slope;
      else CHECK(std::abs(fit.slope - slope_at_one) < 1e-10);
      for (std::size_t k = 0; k < 5; ++k) {
        const double f = power_sum(4)(pts[k].eta);
        CHECK(std::abs(generator_apply_kac(power_sum(4), pts[k], rule) - (-(nn + 2) / (4 * nn) * f + 3 * w * w / (4 * nn))) < 1e-12 * w * w);
      }
    }
  }
  const auto one = [](std::span<const double>) { return 1.0; };
  CHECK(std::abs(generator_apply_kac(one, random_sphere_points(4, 1.0, 1, 2)[0], rule)) < 1e-15);
  const auto three = eigenfunction_fit_kac(power_sum(4), random_sphere_points(3, 1.0, 1000, 1), rule);
  CHECK(std::abs(three.slope + 5.0 / 12) < 1e-10);
}

TEST_CASE("flat Kac eigenfunction")
{
  const auto rule = QuadratureRule::interval_gauss(16);
  for (std::size_t n = 3; n <= 6; ++n) {
    const double nn = double(n);
    for (double w : {1.0, 2.0}) {
      const auto pts = random_simplex_points(n, w, 1000, 23 + n);
      const auto fit = eigenfunction_fit_flat(power_sum(2), pts, rule);
      CHECK(std::abs(fit.slope + (nn + 1) / (3 * nn)) < 1e-10);
      CHECK(std::abs(fit.intercept - 2 * w * w / (3 * nn)) < 1e-10 * w * w);
      CHECK(fit.max_residual < 1e-10 * w * w);
    }
  }
  for (const auto& p : random_simplex_points(3, 1.5, 10, 8)) {
    const double f = power_sum(2)(p.eta);
    CHECK(std::abs(generator_apply_flat(power_sum(2), p, rule) - (-4.0 / 9 * f + 2.0 / 9 * 1.5 * 1.5)) < 1e-13);
  }
  const auto one = [](std::span<const double>) { return 1.0; };
  CHECK(std::abs(generator_apply_flat(one, random_simplex_points(4, 1.0, 1, 2)[0], rule)) < 1e-15);
}

TEST_CASE("conditional second moment")
{
  const auto rule = QuadratureRule::interval_gauss(16);
  CHECK(conditional_second_moment_flat(1.0) == 0.0);
  CHECK(std::abs(conditional_second_moment_flat(0.0) - 1.0 / 3) < 1e-15);
  CHECK(std::abs(conditional_second_moment_flat(0.5) - 1.0 / 12) < 1e-15);
  for (double e : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
    // eta_1 | eta_2 is uniform on [0, 1 - eta_2]
    const double oracle = (1 - e) * (1 - e) / 3;
    CHECK(std::abs(conditional_second_moment_flat(e) - oracle) < 1e-15);
    CHECK(std::abs(conditional_second_moment_flat_quadrature(e, rule) - oracle) < 1e-12);
  }
  CHECK_THROWS_AS(conditional_second_moment_flat(1.5), DomainError);
}

TEST_CASE("one-dimensional operator K")
{
  CHECK_THROWS_AS(k_operator_matrix(0), DomainError);
  const std::size_t n_max = 8;
  const auto k = k_operator_matrix(n_max);
  // K phi(a) = (1/(1-a)) int_0^{1-a} phi, evaluated from monomial antiderivatives
  const auto oracle = [](const Eigen::VectorXd& c, double a) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < c.size(); ++d) s += c(d) * std::pow(1 - a, double(d)) / double(d + 1);
    return s;
  };
  const auto eval = [](const Eigen::VectorXd& c, double a) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < c.size(); ++d) s += c(d) * std::pow(a, double(d));
    return s;
  };
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd c(Eigen::Index(n_max + 1));
    for (Eigen::Index d = 0; d < c.size(); ++d) c(d) = g(rng);
    const auto kc = k.apply(c);
    for (double a : {0.0, 0.2, 0.5, 0.77, 0.99}) CHECK(std::abs(eval(kc, a) - oracle(c, a)) < 1e-12);
  }

  Eigen::VectorXd one = Eigen::VectorXd::Zero(Eigen::Index(n_max + 1));
  one(0) = 1.0;
  CHECK((k.apply(one) - one).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::VectorXd phi1 = Eigen::VectorXd::Zero(Eigen::Index(n_max + 1));
  phi1(0) = -1.0 / 3;
  phi1(1) = 1.0;
  CHECK((k.apply(phi1) + 0.5 * phi1).cwiseAbs().maxCoeff() < 1e-15);

  const auto ev = k.eigenvalues();
  REQUIRE(ev.size() == n_max + 1);
  for (std::size_t d = 0; d <= n_max; ++d) {
    const double mu = (d % 2 ? -1.0 : 1.0) / double(d + 1);
    CHECK(std::abs(ev[d] - mu) < 1e-10);
    CHECK(k_operator_eigenvalue(d) == Rational(d % 2 ? -1 : 1, (long long)d + 1));
  }
}

TEST_CASE("gap bound from the K spectrum")
{
  CHECK(gap3_bound_from_mu(Rational(-1, 2), Rational(1, 3)) == Rational(4, 9));
  CHECK(gap3_bound_from_mu(Rational(0), Rational(0)) == Rational(2, 3));
  CHECK(gap3_bound_from_mu(Rational(-1), Rational(1)) == Rational(0));
  CHECK(std::abs(gap3_bound_from_mu(-0.5, 1.0 / 3) - 4.0 / 9) < 1e-15);
  CHECK(gap3_bound_from_mu(k_operator_eigenvalue(1), k_operator_eigenvalue(2)) == Rational(4, 9));
  CHECK_THROWS_AS(gap3_bound_from_mu(0.5, 0.2), DomainError);
  CHECK_THROWS_AS(gap3_bound_from_mu(Rational(-2), Rational(0)), DomainError);
}

TEST_CASE("affine fit")
{
  const std::vector<double> x = {0, 1, 2, 3}, y = {1, 3, 5, 7};
  const auto fit = affine_fit(x, y);
  CHECK(std::abs(fit.slope - 2.0) < 1e-15);
  CHECK(std::abs(fit.intercept - 1.0) < 1e-15);
  CHECK(fit.max_residual < 1e-15);
  CHECK_THROWS_AS(affine_fit(std::vector<double>{1, 1}, std::vector<double>{0, 1}), DomainError);
  CHECK_THROWS_AS(affine_fit(std::vector<double>{1, 2}, std::vector<double>{0}), ShapeError);
}

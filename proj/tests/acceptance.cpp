// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "cgap/continuum.hpp"
#include "cgap/monte_carlo.hpp"
#include "cgap/spectra.hpp"
#include "cgap/theorems.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>

using namespace cgap;

namespace {

struct Outcome
{
  bool pass = true;
  std::string detail;
};

bool all_pass(const std::vector<BoundReport>& reports, std::size_t* asserted = nullptr)
{
  std::size_t count = 0;
  bool ok = true;
  for (const auto& r : reports)
    if (r.asserted) {
      ++count;
      ok = ok && r.pass;
    }
  if (asserted) *asserted += count;
  return ok;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome kac_eigenfunction()
{
  const auto rule = QuadratureRule::uniform_angle(64);
  double worst_slope = 0.0, worst_residual = 0.0;
  for (std::size_t n = 3; n <= 6; ++n)
    for (double w : {1.0, 4.0}) {
      const auto fit = eigenfunction_fit_kac(power_sum(4), random_sphere_points(n, w, 1000, 100 + n), rule);
      worst_slope = std::max(worst_slope, std::abs(fit.slope + double(n + 2) / double(4 * n)));
      worst_residual = std::max(worst_residual, fit.max_residual);
    }
  return {worst_slope < 1e-9 && worst_residual < 1e-9,
          fmt("N=3..6, omega=1,4: max slope error %.2e, max residual %.2e", worst_slope, worst_residual)};
}

Outcome flat_kac()
{
  const auto fit = eigenfunction_fit_flat(power_sum(2), random_simplex_points(3, 1.0, 1000, 7),
                                          QuadratureRule::interval_gauss(16));
  const double slope_error = std::abs(fit.slope + 4.0 / 9);
  const auto ev = k_operator_matrix(8).eigenvalues();
  double k_error = 0.0;
  for (std::size_t d = 0; d <= 8; ++d) k_error = std::max(k_error, std::abs(ev[d] - (d % 2 ? -1.0 : 1.0) / double(d + 1)));
  const bool exact = gap3_bound_from_mu(Rational(-1, 2), Rational(1, 3)) == Rational(4, 9);
  return {slope_error < 1e-9 && k_error < 1e-10 && exact,
          fmt("slope error %.2e, K eigenvalue error %.2e, gap3 bound = 4/9 exactly: ", slope_error, k_error) +
              (exact ? "yes" : "no")};
}

Outcome transpositions()
{
  double worst = 0.0;
  bool sizes = true;
  const std::size_t expected[] = {6, 24, 120};
  for (std::size_t n = 3; n <= 5; ++n) {
    const auto gen = build_generator(ModelSpec::uniform_permutations(n));
    sizes = sizes && gen.size() == expected[n - 3];
    worst = std::max(worst, std::abs(spectral_gap(gen).gap - 0.5));
  }
  return {worst < 1e-9 && sizes, fmt("N=3,4,5: max |gap - 1/2| = %.2e", worst)};
}

Outcome three_site()
{
  std::mt19937_64 rng(4);
  double gap_err = 0.0, trace_err = 0.0, det_err = 0.0, min_gap = 1.0;
  for (int k = 0; k < 100; ++k) {
    const auto p = random_densities(3, 0.1, rng());
    const auto gen = build_generator(ModelSpec::exclusion(p, 1));
    const double gap = spectral_gap(gen).gap;
    const auto w = three_site_weights(p[0], p[1], p[2]);
    const Eigen::Matrix3d pm = p_matrix_three_site(w[0], w[1], w[2]);
    Eigen::EigenSolver<Eigen::Matrix3d> es(pm);
    std::array<double, 3> lam{};
    for (int i = 0; i < 3; ++i) lam[std::size_t(i)] = es.eigenvalues()(i).real();
    std::sort(lam.begin(), lam.end(), std::greater<>());
    gap_err = std::max(gap_err, std::abs(gap - std::min(1 - lam[1], 1 - lam[2])));
    trace_err = std::max(trace_err, std::abs(pm.trace() - 2.0));
    det_err = std::max(det_err, std::abs(pm.determinant() - det_p_formula(w[0], w[1], w[2])));
    min_gap = std::min(min_gap, gap);
  }
  return {gap_err < 1e-10 && trace_err < 1e-12 && det_err < 1e-12 && min_gap > 1.0 / 3,
          fmt("100 draws: gap vs P %.2e, trace %.2e, det %.2e, ", gap_err, trace_err, det_err) +
              fmt("min gap %.6f > 1/3", min_gap)};
}

Outcome reduction()
{
  std::mt19937_64 rng(5);
  std::size_t asserted = 0;
  bool ok = true;
  double worst = 1.0;
  for (int k = 0; k < 50; ++k) {
    ReductionOptions opt;
    opt.seed = rng();
    const auto reports = verify_reduction_theorem(ModelSpec::exclusion(random_densities(6, 0.1, rng()), 0), opt);
    ok = all_pass(reports, &asserted) && ok;
    for (const auto& r : reports)
      if (r.asserted && r.kind == BoundKind::Lower) worst = std::min(worst, r.margin);
  }
  bool exact = true;
  for (long long n = 2; n <= 100; ++n)
    exact = exact && reduction_bound(Rational(5, 12), std::size_t(n)) == Rational(n + 2, 4 * n);
  return {ok && exact, fmt("50 draws, %.0f checks, smallest margin %.3e; (N+2)/(4N) identity N=2..100: ",
                           double(asserted), worst) +
                           (exact ? "exact" : "broken")};
}

Outcome clique4()
{
  bool exact = true;
  for (long long n = 4; n <= 100; ++n)
    exact = exact && clique4_bound(Rational(1, 3), std::size_t(n)) == Rational(1, 6) + Rational(2, 3 * n);
  return {exact, std::string("clique4_bound(1/3, N) = 1/6 + 2/(3N) for N=4..100: ") + (exact ? "exact" : "broken")};
}

Outcome colored()
{
  const std::vector<Omega> sweep = {{1, 1}, {2, 2}, {3, 3}};
  const auto reports = verify_colored_bounds(random_densities(8, 0.1, 7), 2, sweep);
  std::size_t asserted = 0;
  const bool ok = all_pass(reports, &asserted);
  double spread = 0.0;
  std::string failed;
  for (const auto& r : reports) {
    if (r.name.find("gamma=0") != std::string::npos && r.name.find("spread") != std::string::npos) spread = r.measured;
    if (r.asserted && !r.pass) failed += "; failed: " + r.name;
  }
  return {ok, fmt("N=8, m=2: %.0f checks, gamma=0 g/(1-rho) spread %.3f (limit 3)", double(asserted), spread) + failed};
}

Outcome monte_carlo()
{
  const ContinuumModel model{ContinuumKind::Sphere, 4, 1.0};
  const std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  const auto chains = run_chains(model, 1000000, 8, 2024, 0.5, power_sum(4), threads);
  const auto est = relaxation_rate_estimate(chains);
  const double err = std::abs(est.rate - 0.375);
  return {err < 0.0375 && err < 3 * est.stderr_,
          fmt("rate %.5f, stderr %.5f, |rate - 0.375| = %.5f", est.rate, est.stderr_, err)};
}

Outcome properties()
{
  std::mt19937_64 rng(9);
  std::size_t asserted = 0;
  bool ok = true;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 4 + std::size_t(k % 2);
    ModelSpec spec;
    switch (k % 4) {
      case 0: spec = ModelSpec::exclusion(random_densities(n + 1, 0.1, rng()), 2); break;
      case 1: spec = ModelSpec::colored(random_densities(n, 0.1, rng()), 2, 1, {1, 1}); break;
      case 2: spec = ModelSpec::colored(random_densities(n, 0.1, rng()), 2, 0, {1, 2}); break;
      default: {
        std::vector<std::vector<double>> b(n, std::vector<double>(n));
        for (auto& row : b)
          for (double& v : row) v = u(rng);
        spec = ModelSpec::permutations(b);
      }
    }
    ok = all_pass(property_checks(spec, rng(), 100), &asserted) && ok;
  }
  return {ok, fmt("20 instances, %.0f checks", double(asserted))};
}

}  // namespace

int main()
{
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"Kac eigenfunction", kac_eigenfunction},
      {"flat Kac and K operator", flat_kac},
      {"random transpositions", transpositions},
      {"three-site exclusion", three_site},
      {"reduction theorem", reduction},
      {"four-clique identity", clique4},
      {"colored exclusion", colored},
      {"Monte Carlo relaxation", monte_carlo},
      {"property suites", properties},
  };
  int failures = 0, index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}

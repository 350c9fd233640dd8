#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cgap/errors.hpp"
#include "cgap/monte_carlo.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <set>

using namespace cgap;

namespace {

double sum_sq(std::span<const double> x) { return std::inner_product(x.begin(), x.end(), x.begin(), 0.0); }

double sum(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); }

// Exact simulation of a two-state chain with rates up (0 -> 1) and down (1 -> 0), read
// on the grid k * dt. The indicator of state 1 has autocorrelation exp(-(up + down) t).
ObservableSeries two_state_series(double up, double down, double dt, std::size_t samples, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  int state = u(rng) < up / (up + down) ? 1 : 0;
  double next = std::exponential_distribution<double>(state ? down : up)(rng);
  ObservableSeries s;
  s.dt = dt;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = double(k) * dt;
    while (next <= t) {
      state = 1 - state;
      next += std::exponential_distribution<double>(state ? down : up)(rng);
    }
    s.values.push_back(state);
  }
  return s;
}

}  // namespace

TEST_CASE("continuum models from specs")
{
  const auto s = ContinuumModel::from_spec(ModelSpec::kac_sphere(4, 2.0));
  CHECK(s.kind == ContinuumKind::Sphere);
  CHECK(s.n == 4);
  CHECK(s.omega == 2.0);
  CHECK(ContinuumModel::from_spec(ModelSpec::flat_kac(3)).kind == ContinuumKind::Simplex);
  CHECK_THROWS_AS(ContinuumModel::from_spec(ModelSpec::uniform_permutations(3)), UnsupportedVariantError);
}

TEST_CASE("initial draws lie on the constraint surface")
{
  const ContinuumModel sphere{ContinuumKind::Sphere, 5, 3.0}, simplex{ContinuumKind::Simplex, 5, 3.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(std::abs(sum_sq(random_initial_state(sphere, seed)) - 3.0) < 1e-12);
    const auto x = random_initial_state(simplex, seed);
    CHECK(std::abs(sum(x) - 3.0) < 1e-12);
    for (double v : x) CHECK(v >= 0.0);
  }
  CHECK(random_initial_state(sphere, 4) == random_initial_state(sphere, 4));
  CHECK(random_initial_state(sphere, 4) != random_initial_state(sphere, 5));
}

TEST_CASE("zero events returns the initial state")
{
  const ContinuumModel m{ContinuumKind::Sphere, 3, 1.0};
  const auto x0 = random_initial_state(m, 1);
  const auto t = mc_trajectory(m, x0, 0, 2);
  REQUIRE(t.times.size() == 1);
  CHECK(t.times[0] == 0.0);
  CHECK(std::vector<double>(t.state(0).begin(), t.state(0).end()) == x0);
  CHECK(t.events == 0);
}

TEST_CASE("pair moves conserve the constraint and touch two sites")
{
  for (auto kind : {ContinuumKind::Sphere, ContinuumKind::Simplex}) {
    const ContinuumModel m{kind, 4, 2.0};
    const auto t = mc_trajectory(m, random_initial_state(m, 3), 5000, 4);
    REQUIRE(t.times.size() == 5001);
    std::size_t unchanged = 0;
    for (std::size_t k = 1; k < t.times.size(); ++k) {
      const auto a = t.state(k - 1), b = t.state(k);
      CHECK(t.times[k] > t.times[k - 1]);
      std::vector<std::size_t> moved;
      for (std::size_t i = 0; i < 4; ++i)
        if (a[i] != b[i]) moved.push_back(i);
      if (moved.empty()) {
        ++unchanged;
        continue;
      }
      if (k % 1024 == 0) continue;  // periodic renormalization rescales every site
      REQUIRE(moved.size() == 2);
      const std::size_t i = moved[0], j = moved[1];
      if (kind == ContinuumKind::Sphere) {
        CHECK(std::abs(a[i] * a[i] + a[j] * a[j] - b[i] * b[i] - b[j] * b[j]) < 1e-14 * 2.0);
        CHECK(std::abs(sum_sq(b) - 2.0) < 1e-12);
      } else {
        CHECK(std::abs(a[i] + a[j] - b[i] - b[j]) < 1e-14 * 2.0);
        CHECK(b[i] >= 0.0);
        CHECK(b[j] >= 0.0);
        CHECK(std::abs(sum(b) - 2.0) < 1e-12);
      }
    }
    CHECK(unchanged == t.events - t.applied_moves);
    // i = j with probability 1/N
    CHECK(std::abs(double(unchanged) / 5000 - 0.25) < 0.03);
  }
}

TEST_CASE("event clock has total rate N/2")
{
  const ContinuumModel m{ContinuumKind::Simplex, 6, 1.0};
  CollisionWalk walk(m, random_initial_state(m, 8), 9);
  for (int k = 0; k < 100000; ++k) walk.step();
  CHECK(walk.events() == 100000);
  // mean waiting time 2/N; relative sd of the total is 1/sqrt(1e5)
  CHECK(std::abs(walk.time() / 100000 - 2.0 / 6) < 0.02 * 2.0 / 6);
}

TEST_CASE("renormalization bounds the drift over long runs")
{
  for (auto kind : {ContinuumKind::Sphere, ContinuumKind::Simplex}) {
    const ContinuumModel m{kind, 4, 1.0};
    CollisionWalk walk(m, random_initial_state(m, 10), 11);
    for (int k = 0; k < 1000000; ++k) walk.step();
    CHECK(walk.max_constraint_drift() < 1e-8);
    CHECK(walk.constraint_drift() < 1e-8);
  }
}

TEST_CASE("chains are deterministic and independent of the thread count")
{
  const ContinuumModel m{ContinuumKind::Sphere, 4, 1.0};
  const auto a = run_chains(m, 20000, 6, 77, 0.5, power_sum(4), 1);
  const auto b = run_chains(m, 20000, 6, 77, 0.5, power_sum(4), 4);
  REQUIRE(a.size() == 6);
  for (std::size_t c = 0; c < 6; ++c) CHECK(a[c].values == b[c].values);
  CHECK(a[0].values != a[1].values);
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 1000; ++s) seeds.insert(split_seed(77, s));
  CHECK(seeds.size() == 1000);
}

TEST_CASE("sampling grid")
{
  const ContinuumModel m{ContinuumKind::Simplex, 3, 1.0};
  const auto x0 = random_initial_state(m, 5);
  const auto s = sample_observable(m, x0, 1000, 6, 0.25, power_sum(2));
  const auto t = mc_trajectory(m, x0, 1000, 6);
  CHECK(s.events == 1000);
  CHECK(s.values.front() == power_sum(2)(x0));
  // grid points k * dt strictly before the last event time
  CHECK(double(s.values.size() - 1) * 0.25 < t.times.back());
  CHECK(double(s.values.size()) * 0.25 >= t.times.back());
  // each grid value is the state of the last event at or before the grid time
  std::size_t e = 0;
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    while (e + 1 < t.times.size() && t.times[e + 1] <= double(k) * 0.25) ++e;
    CHECK(s.values[k] == power_sum(2)(t.state(e)));
  }
}

TEST_CASE("two-state chain oracle")
{
  const double up = 0.25, down = 0.35, gap = up + down;
  std::vector<ObservableSeries> series;
  for (std::uint64_t c = 0; c < 8; ++c) series.push_back(two_state_series(up, down, 0.5, 100000, 100 + c));
  const auto est = relaxation_rate_estimate(series);
  CHECK(est.batches == 32);
  CHECK(est.stderr_ > 0.0);
  CHECK(std::abs(est.rate - gap) < 3 * est.stderr_);
  CHECK(std::abs(est.rate - gap) < 0.05 * gap);
  CHECK(est.lags.front() >= 0.5);
  CHECK(est.lags.back() <= 3.0);
}

TEST_CASE("fit-window failures")
{
  ObservableSeries constant;
  constant.dt = 0.5;
  constant.values.assign(1000, 2.0);
  const std::vector<ObservableSeries> c = {constant};
  CHECK_THROWS_AS(relaxation_rate_estimate(c), FitWindowError);

  auto a = two_state_series(0.3, 0.3, 0.5, 2000, 1), b = two_state_series(0.3, 0.3, 0.25, 2000, 2);
  const std::vector<ObservableSeries> mixed = {a, b};
  CHECK_THROWS_AS(relaxation_rate_estimate(mixed), FitWindowError);

  const std::vector<ObservableSeries> one = {a};
  CHECK_THROWS_AS(relaxation_rate_estimate(one, FitWindow{0.5, 0.6, 4}), FitWindowError);

  // alternating signal: negative correlation at odd lags
  ObservableSeries alt;
  alt.dt = 0.5;
  for (int k = 0; k < 1000; ++k) alt.values.push_back(k % 2 ? 1.0 : -1.0);
  const std::vector<ObservableSeries> al = {alt};
  CHECK_THROWS_AS(relaxation_rate_estimate(al), FitWindowError);
}

TEST_CASE("Kac sphere relaxation rates")
{
  const ContinuumModel three{ContinuumKind::Sphere, 3, 1.0};
  const auto c3 = run_chains(three, 400000, 8, 2024, 0.5, power_sum(4), 4);
  const auto e3 = relaxation_rate_estimate(c3);
  CHECK(std::abs(e3.rate - 5.0 / 12) < 0.1 * 5.0 / 12);

  const ContinuumModel flat{ContinuumKind::Simplex, 3, 1.0};
  const auto f3 = run_chains(flat, 400000, 8, 2025, 0.5, power_sum(2), 4);
  const auto ef = relaxation_rate_estimate(f3);
  CHECK(std::abs(ef.rate - 4.0 / 9) < 0.1 * 4.0 / 9);
}

#include "cgap/monte_carlo.hpp"

#include "cgap/errors.hpp"
#include "cgap/parallel.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace cgap {

ContinuumModel ContinuumModel::from_spec(const ModelSpec& spec)
{
  spec.validate();
  if (const auto* k = std::get_if<KacSphere>(&spec.params)) return {ContinuumKind::Sphere, spec.n, k->radius_sq};
  if (const auto* f = std::get_if<FlatKac>(&spec.params)) return {ContinuumKind::Simplex, spec.n, f->mass};
  throw UnsupportedVariantError("Monte Carlo needs a kac_sphere or flat_kac model, got " +
                                std::string(variant_name(spec.variant())));
}

std::vector<double> random_initial_state(const ContinuumModel& model, std::uint64_t seed)
{
  if (model.kind == ContinuumKind::Sphere) return random_sphere_points(model.n, model.omega, 1, seed).front().eta;
  return random_simplex_points(model.n, model.omega, 1, seed).front().eta;
}

// ---------------------------------------------------------------------------

CollisionWalk::CollisionWalk(ContinuumModel model, std::vector<double> initial, std::uint64_t seed,
                             std::size_t renormalize_every)
    : model_(model),
      eta_(std::move(initial)),
      rng_(seed),
      clock_(0.5 * static_cast<double>(model.n)),
      site_(0, model.n - 1),
      unit_(0.0, 1.0),
      renormalize_every_(std::max<std::size_t>(renormalize_every, 1))
{
  if (eta_.size() != model_.n) throw ShapeError("initial state has the wrong number of sites");
  if (model_.kind == ContinuumKind::Sphere)
    SpherePoint::make(eta_, model_.omega);
  else
    SimplexPoint::make(eta_, model_.omega);
}

double CollisionWalk::constraint_drift() const
{
  double total = 0.0;
  for (double v : eta_) total += model_.kind == ContinuumKind::Sphere ? v * v : v;
  return std::abs(total - model_.omega);
}

void CollisionWalk::renormalize()
{
  max_drift_ = std::max(max_drift_, constraint_drift());
  double total = 0.0;
  for (double v : eta_) total += model_.kind == ContinuumKind::Sphere ? v * v : v;
  const double scale = model_.kind == ContinuumKind::Sphere ? std::sqrt(model_.omega / total)
                                                            : model_.omega / total;
  for (double& v : eta_) v *= scale;
}

bool CollisionWalk::step()
{
  time_ += clock_(rng_);
  ++events_;
  const std::size_t i = site_(rng_);
  const std::size_t j = site_(rng_);
  bool moved = false;
  if (i != j) {
    const double u = unit_(rng_);
    if (model_.kind == ContinuumKind::Sphere) {
      const double theta = 2.0 * std::numbers::pi * u;
      const double cs = std::cos(theta), sn = std::sin(theta);
      const double a = eta_[i], c = eta_[j];
      eta_[i] = a * cs + c * sn;
      eta_[j] = -a * sn + c * cs;
    } else {
      const double s = eta_[i] + eta_[j];
      eta_[i] = u * s;
      eta_[j] = s - eta_[i];
    }
    ++applied_;
    moved = true;
  }
  if (events_ % renormalize_every_ == 0) renormalize();
  return moved;
}

// ---------------------------------------------------------------------------

Trajectory mc_trajectory(const ContinuumModel& model, std::vector<double> initial, std::size_t events,
                         std::uint64_t seed, std::size_t thin)
{
  thin = std::max<std::size_t>(thin, 1);
  CollisionWalk walk(model, std::move(initial), seed);
  Trajectory out;
  out.n = model.n;
  auto record = [&] {
    out.times.push_back(walk.time());
    out.states.insert(out.states.end(), walk.state().begin(), walk.state().end());
  };
  record();
  for (std::size_t e = 1; e <= events; ++e) {
    walk.step();
    if (e % thin == 0) record();
  }
  out.events = walk.events();
  out.applied_moves = walk.applied_moves();
  out.max_constraint_drift = std::max(walk.max_constraint_drift(), walk.constraint_drift());
  return out;
}

ObservableSeries sample_observable(const ContinuumModel& model, std::vector<double> initial,
                                   std::size_t events, std::uint64_t seed, double dt,
                                   const PointFunction& observable)
{
  if (!(dt > 0.0)) throw DomainError("sampling step must be positive");
  CollisionWalk walk(model, std::move(initial), seed);
  ObservableSeries out;
  out.dt = dt;
  out.values.reserve(static_cast<std::size_t>(static_cast<double>(events) / (0.5 * model.n * dt)) + 2);
  double current = observable(walk.state());
  std::size_t k = 0;
  for (std::size_t e = 0; e < events; ++e) {
    walk.step();
    // grid points before the new event time still see the previous state
    for (; static_cast<double>(k) * dt < walk.time(); ++k) out.values.push_back(current);
    current = observable(walk.state());
  }
  out.events = walk.events();
  out.max_constraint_drift = std::max(walk.max_constraint_drift(), walk.constraint_drift());
  return out;
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream)
{
  std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<ObservableSeries> run_chains(const ContinuumModel& model, std::size_t events,
                                         std::size_t chains, std::uint64_t master_seed, double dt,
                                         const PointFunction& observable, std::size_t threads)
{
  std::vector<ObservableSeries> out(chains);
  parallel_for(chains, threads, [&](std::size_t c) {
    const std::uint64_t chain_seed = split_seed(master_seed, c);
    out[c] = sample_observable(model, random_initial_state(model, split_seed(chain_seed, 0)), events,
                               split_seed(chain_seed, 1), dt, observable);
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Segment
{
  const double* data;
  std::size_t size;
};

/// Sum over t of (x_t - m)(x_{t+k} - m) and the number of terms.
std::pair<double, double> lagged_sum(const Segment& s, double mean, std::size_t k)
{
  if (s.size <= k) return {0.0, 0.0};
  double acc = 0.0;
  for (std::size_t t = 0; t + k < s.size; ++t) acc += (s.data[t] - mean) * (s.data[t + k] - mean);
  return {acc, static_cast<double>(s.size - k)};
}

double fit_rate(std::span<const Segment> segments, double mean, std::span<const std::size_t> lags, double dt,
                std::vector<double>* log_rho)
{
  double c0 = 0.0, n0 = 0.0;
  for (const auto& s : segments) {
    auto [a, n] = lagged_sum(s, mean, 0);
    c0 += a;
    n0 += n;
  }
  if (!(c0 / n0 > 1e-24 * std::max(1.0, mean * mean))) throw FitWindowError("observable has zero variance");
  std::vector<double> x, y;
  for (std::size_t k : lags) {
    double ck = 0.0, nk = 0.0;
    for (const auto& s : segments) {
      auto [a, n] = lagged_sum(s, mean, k);
      ck += a;
      nk += n;
    }
    const double rho = nk > 0.0 ? (ck / nk) / (c0 / n0) : 0.0;
    if (!(rho > 0.0))
      throw FitWindowError("non-positive autocorrelation at lag " + std::to_string(static_cast<double>(k) * dt));
    x.push_back(static_cast<double>(k) * dt);
    y.push_back(std::log(rho));
  }
  if (log_rho) *log_rho = y;
  return -affine_fit(x, y).slope;
}

}  // namespace

RateEstimate relaxation_rate_estimate(std::span<const ObservableSeries> series, const FitWindow& window)
{
  if (series.empty()) throw FitWindowError("no samples");
  const double dt = series.front().dt;
  for (const auto& s : series)
    if (s.dt != dt) throw FitWindowError("series have different sampling steps");
  if (!(window.lag_min >= 0.0) || !(window.lag_max > window.lag_min))
    throw FitWindowError("lag window must satisfy 0 <= lag_min < lag_max");

  std::vector<std::size_t> lags;
  for (auto k = static_cast<std::size_t>(std::ceil(window.lag_min / dt - 1e-9));
       static_cast<double>(k) * dt <= window.lag_max + 1e-9 * dt; ++k)
    if (k > 0) lags.push_back(k);
  if (lags.size() < 2) throw FitWindowError("lag window holds fewer than two sampled lags");

  double total = 0.0, count = 0.0;
  std::vector<Segment> whole;
  for (const auto& s : series) {
    total += std::accumulate(s.values.begin(), s.values.end(), 0.0);
    count += static_cast<double>(s.values.size());
    whole.push_back({s.values.data(), s.values.size()});
  }
  if (count < 2.0) throw FitWindowError("not enough samples");
  const double mean = total / count;

  RateEstimate est;
  est.rate = fit_rate(whole, mean, lags, dt, &est.log_autocorrelation);
  for (std::size_t k : lags) est.lags.push_back(static_cast<double>(k) * dt);

  const std::size_t per = std::max<std::size_t>(window.batches_per_series, 1);
  for (const auto& s : series) {
    const std::size_t len = s.values.size() / per;
    if (len <= lags.back() + 1) throw FitWindowError("batches are shorter than the lag window");
    for (std::size_t b = 0; b < per; ++b) {
      const Segment seg{s.values.data() + b * len, len};
      est.batch_rates.push_back(fit_rate(std::span(&seg, 1), mean, lags, dt, nullptr));
    }
  }
  est.batches = est.batch_rates.size();
  if (est.batches >= 2) {
    const double bm = std::accumulate(est.batch_rates.begin(), est.batch_rates.end(), 0.0) /
                      static_cast<double>(est.batches);
    double ss = 0.0;
    for (double r : est.batch_rates) ss += (r - bm) * (r - bm);
    est.stderr_ = std::sqrt(ss / static_cast<double>(est.batches - 1) / static_cast<double>(est.batches));
  }
  return est;
}

}  // namespace cgap

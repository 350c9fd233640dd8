#pragma once

#include "cgap/continuum.hpp"
#include "cgap/models.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace cgap {

enum class ContinuumKind { Sphere, Simplex };

struct ContinuumModel
{
  ContinuumKind kind = ContinuumKind::Sphere;
  std::size_t n = 2;
  double omega = 1.0;

  /// Accepts KacSphere and FlatKac specs; throws UnsupportedVariantError otherwise.
  static ContinuumModel from_spec(const ModelSpec& spec);
};

/// Stationary draw from the uniform measure on the constraint surface.
std::vector<double> random_initial_state(const ContinuumModel& model, std::uint64_t seed);

/// Continuous-time event chain: event times form a Poisson stream of total rate N/2;
/// each event draws an ordered pair (i, j) uniformly with replacement and applies the
/// pair move unless i = j.
class CollisionWalk
{
 public:
  CollisionWalk(ContinuumModel model, std::vector<double> initial, std::uint64_t seed,
                std::size_t renormalize_every = 1024);

  /// Advances to the next event; returns true if a pair move was applied.
  bool step();

  double time() const { return time_; }
  std::span<const double> state() const { return eta_; }
  std::size_t events() const { return events_; }
  std::size_t applied_moves() const { return applied_; }
  /// Largest constraint drift seen at any renormalization or query.
  double max_constraint_drift() const { return max_drift_; }
  double constraint_drift() const;

 private:
  void renormalize();

  ContinuumModel model_;
  std::vector<double> eta_;
  std::mt19937_64 rng_;
  std::exponential_distribution<double> clock_;
  std::uniform_int_distribution<std::size_t> site_;
  std::uniform_real_distribution<double> unit_;
  std::size_t renormalize_every_;
  double time_ = 0.0;
  std::size_t events_ = 0;
  std::size_t applied_ = 0;
  double max_drift_ = 0.0;
};

struct Trajectory
{
  std::size_t n = 0;
  std::vector<double> times;   ///< recorded event times, starting with 0
  std::vector<double> states;  ///< row-major, one row of n values per recorded time
  std::size_t events = 0;
  std::size_t applied_moves = 0;
  double max_constraint_drift = 0.0;

  std::span<const double> state(std::size_t k) const { return {states.data() + k * n, n}; }
};

/// Records the initial state and every `thin`-th event.
Trajectory mc_trajectory(const ContinuumModel& model, std::vector<double> initial, std::size_t events,
                         std::uint64_t seed, std::size_t thin = 1);

/// Observable sampled on the time grid k * dt, k = 0, 1, ... up to the last event.
struct ObservableSeries
{
  double dt = 0.1;
  std::vector<double> values;
  std::size_t events = 0;
  double max_constraint_drift = 0.0;
};

ObservableSeries sample_observable(const ContinuumModel& model, std::vector<double> initial,
                                   std::size_t events, std::uint64_t seed, double dt,
                                   const PointFunction& observable);

/// Per-stream seed derived from a master seed by splitmix64.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream);

/// Independent chains, chain c started from a stationary draw; results are ordered
/// by chain index whatever the thread count.
std::vector<ObservableSeries> run_chains(const ContinuumModel& model, std::size_t events,
                                         std::size_t chains, std::uint64_t master_seed, double dt,
                                         const PointFunction& observable, std::size_t threads = 1);

/// Lags (in time units) used for the log-autocorrelation fit.
struct FitWindow
{
  double lag_min = 0.5;
  double lag_max = 3.0;
  std::size_t batches_per_series = 4;
};

struct RateEstimate
{
  double rate = 0.0;
  double stderr_ = 0.0;
  std::size_t batches = 0;
  std::vector<double> batch_rates;
  std::vector<double> lags;
  std::vector<double> log_autocorrelation;  ///< pooled, at each lag
};

/// Least-squares fit of log rho(tau) = c - rate * tau over the window. The rate comes
/// from the pooled autocorrelation, the standard error from batch means.
/// Throws FitWindowError for constant observables or non-positive correlations.
RateEstimate relaxation_rate_estimate(std::span<const ObservableSeries> series, const FitWindow& window = {});

}  // namespace cgap

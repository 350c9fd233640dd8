#include "cgap/models.hpp"

#include "cgap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace cgap {

namespace {

template <class... Ts>
struct Overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_probabilities(const std::vector<double>& p, std::size_t n)
{
  if (p.size() != n)
    throw ShapeError("expected " + std::to_string(n) + " site probabilities, got " +
                     std::to_string(p.size()));
  for (double x : p)
    if (!(x > 0.0 && x < 1.0))
      throw DomainError("site probability " + std::to_string(x) + " outside (0,1)");
}

// Lexicographically ordered distinct permutations of a sorted multiset.
std::vector<Configuration> multiset_permutations(Configuration sorted)
{
  std::vector<Configuration> out;
  do {
    out.push_back(sorted);
  } while (std::next_permutation(sorted.begin(), sorted.end()));
  return out;
}

double log_sum_exp(const std::vector<double>& v)
{
  const double top = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - top);
  return top + std::log(acc);
}

std::size_t factorial(std::size_t n)
{
  std::size_t r = 1;
  for (std::size_t k = 2; k <= n; ++k) r *= k;
  return r;
}

}  // namespace

std::string_view variant_name(Variant v)
{
  switch (v) {
    case Variant::DisorderedExclusion: return "disordered_exclusion";
    case Variant::ColoredExclusion: return "colored_exclusion";
    case Variant::BiasedPermutations: return "biased_permutations";
    case Variant::KacSphere: return "kac_sphere";
    case Variant::FlatKac: return "flat_kac";
  }
  return "unknown";
}

bool ModelSpec::is_finite() const
{
  return !std::holds_alternative<KacSphere>(params) && !std::holds_alternative<FlatKac>(params);
}

void ModelSpec::validate() const
{
  if (n < 2) throw DomainError("model needs N >= 2 components");
  std::visit(Overloaded{
                 [&](const DisorderedExclusion& m) {
                   check_probabilities(m.p, n);
                   if (m.particles < 0) throw DomainError("negative particle count");
                 },
                 [&](const ColoredExclusion& m) {
                   check_probabilities(m.p, n);
                   if (m.colors < 1) throw DomainError("need at least one color");
                   if (m.gamma != 0 && m.gamma != 1) throw DomainError("gamma must be 0 or 1");
                   if (m.counts.size() != static_cast<std::size_t>(m.colors))
                     throw ShapeError("expected one count per color");
                   for (int c : m.counts)
                     if (c < 0) throw DomainError("negative color count");
                 },
                 [&](const BiasedPermutations& m) {
                   if (m.bias.size() != n) throw ShapeError("bias matrix must have N rows");
                   for (const auto& row : m.bias) {
                     if (row.size() != n) throw ShapeError("bias matrix must be N x N");
                     for (double b : row)
                       if (!std::isfinite(b)) throw DomainError("bias values must be finite");
                   }
                 },
                 [&](const KacSphere& m) {
                   if (!(m.radius_sq > 0.0)) throw DomainError("sphere radius squared must be > 0");
                 },
                 [&](const FlatKac& m) {
                   if (!(m.mass > 0.0)) throw DomainError("simplex mass must be > 0");
                 },
             },
             params);
}

ModelSpec ModelSpec::exclusion(std::vector<double> p, int particles)
{
  ModelSpec s{p.size(), DisorderedExclusion{std::move(p), particles}};
  s.validate();
  return s;
}

ModelSpec ModelSpec::colored(std::vector<double> p, int colors, int gamma, std::vector<int> counts)
{
  ModelSpec s{p.size(), ColoredExclusion{std::move(p), colors, gamma, std::move(counts)}};
  s.validate();
  return s;
}

ModelSpec ModelSpec::permutations(std::vector<std::vector<double>> bias)
{
  ModelSpec s{bias.size(), BiasedPermutations{std::move(bias)}};
  s.validate();
  return s;
}

ModelSpec ModelSpec::uniform_permutations(std::size_t n)
{
  return permutations(std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
}

ModelSpec ModelSpec::kac_sphere(std::size_t n, double radius_sq)
{
  ModelSpec s{n, KacSphere{radius_sq}};
  s.validate();
  return s;
}

ModelSpec ModelSpec::flat_kac(std::size_t n, double mass)
{
  ModelSpec s{n, FlatKac{mass}};
  s.validate();
  return s;
}

double global_density(const ModelSpec& spec)
{
  if (const auto* m = std::get_if<DisorderedExclusion>(&spec.params))
    return static_cast<double>(m->particles) / static_cast<double>(spec.n);
  if (const auto* m = std::get_if<ColoredExclusion>(&spec.params))
    return static_cast<double>(std::accumulate(m->counts.begin(), m->counts.end(), 0)) /
           static_cast<double>(spec.n);
  throw UnsupportedVariantError("global density is defined for exclusion variants only");
}

ModelSpec with_particles(const ModelSpec& spec, int particles)
{
  auto m = std::get_if<DisorderedExclusion>(&spec.params);
  if (!m) throw UnsupportedVariantError("with_particles needs a disordered exclusion spec");
  return ModelSpec::exclusion(m->p, particles);
}

ModelSpec with_counts(const ModelSpec& spec, std::vector<int> counts)
{
  auto m = std::get_if<ColoredExclusion>(&spec.params);
  if (!m) throw UnsupportedVariantError("with_counts needs a colored exclusion spec");
  return ModelSpec::colored(m->p, m->colors, m->gamma, std::move(counts));
}

// ---------------------------------------------------------------------------
// ConfigurationSpace

ConfigurationSpace::ConfigurationSpace(ModelSpec spec, std::vector<Configuration> states)
    : spec_(std::move(spec)), states_(std::move(states))
{
  if (states_.empty()) throw EmptySpaceError("configuration space is empty");
  if (!std::is_sorted(states_.begin(), states_.end()) ||
      std::adjacent_find(states_.begin(), states_.end()) != states_.end())
    throw DomainError("states must be strictly increasing in lexicographic order");
}

std::optional<std::size_t> ConfigurationSpace::find(const Configuration& eta) const
{
  auto it = std::lower_bound(states_.begin(), states_.end(), eta);
  if (it == states_.end() || *it != eta) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

std::size_t ConfigurationSpace::index_of(const Configuration& eta) const
{
  if (auto k = find(eta)) return *k;
  throw DomainError("configuration not in state space");
}

std::size_t expected_cardinality(const ModelSpec& spec)
{
  return std::visit(
      Overloaded{
          [&](const DisorderedExclusion& m) -> std::size_t {
            if (m.particles < 0 || static_cast<std::size_t>(m.particles) > spec.n) return 0;
            // binomial via multiplicative formula, exact for desk-scale N
            std::size_t r = 1;
            const std::size_t k = static_cast<std::size_t>(m.particles);
            for (std::size_t i = 1; i <= k; ++i) r = r * (spec.n - k + i) / i;
            return r;
          },
          [&](const ColoredExclusion& m) -> std::size_t {
            const int total = std::accumulate(m.counts.begin(), m.counts.end(), 0);
            if (total > static_cast<int>(spec.n)) return 0;
            std::size_t r = factorial(spec.n) / factorial(spec.n - static_cast<std::size_t>(total));
            for (int c : m.counts) r /= factorial(static_cast<std::size_t>(c));
            return r;
          },
          [&](const BiasedPermutations&) -> std::size_t { return factorial(spec.n); },
          [](const KacSphere&) -> std::size_t { return 0; },
          [](const FlatKac&) -> std::size_t { return 0; },
      },
      spec.params);
}

ConfigurationSpace enumerate(const ModelSpec& spec, const EnumerationOptions& options)
{
  spec.validate();
  if (!spec.is_finite())
    throw UnsupportedVariantError(std::string("cannot enumerate continuous variant ") +
                                  std::string(variant_name(spec.variant())));

  Configuration start(spec.n, 0);
  if (const auto* m = std::get_if<DisorderedExclusion>(&spec.params)) {
    if (static_cast<std::size_t>(m->particles) > spec.n)
      throw EmptySpaceError("more particles than sites");
    std::fill(start.end() - m->particles, start.end(), 1);
  } else if (const auto* m = std::get_if<ColoredExclusion>(&spec.params)) {
    const int total = std::accumulate(m->counts.begin(), m->counts.end(), 0);
    if (total > static_cast<int>(spec.n))
      throw EmptySpaceError("color counts exceed the number of sites");
    auto it = start.begin() + (static_cast<std::ptrdiff_t>(spec.n) - total);
    for (int k = 0; k < m->colors; ++k) it = std::fill_n(it, m->counts[k], k + 1);
  } else {
    if (spec.n > options.max_permutation_n)
      throw DomainError("permutation space with N = " + std::to_string(spec.n) +
                        " exceeds the cap N <= " + std::to_string(options.max_permutation_n));
    std::iota(start.begin(), start.end(), 1);
  }
  return ConfigurationSpace(spec, multiset_permutations(std::move(start)));
}

// ---------------------------------------------------------------------------
// StationaryMeasure

StationaryMeasure::StationaryMeasure(std::vector<double> weights) : weights_(std::move(weights))
{
  for (double w : weights_)
    if (!(w > 0.0)) throw DomainError("stationary weights must be positive");
}

double StationaryMeasure::expectation(std::span<const double> f) const
{
  if (f.size() != weights_.size()) throw ShapeError("function length does not match measure");
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) acc += weights_[k] * f[k];
  return acc;
}

double StationaryMeasure::inner(std::span<const double> f, std::span<const double> g) const
{
  if (f.size() != weights_.size() || g.size() != weights_.size())
    throw ShapeError("function length does not match measure");
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) acc += weights_[k] * f[k] * g[k];
  return acc;
}

double StationaryMeasure::variance(std::span<const double> f) const
{
  const double mean = expectation(f);
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) acc += weights_[k] * (f[k] - mean) * (f[k] - mean);
  return acc;
}

double site_log_weight(const ModelSpec& spec, std::size_t site, int value)
{
  return std::visit(
      Overloaded{
          [&](const DisorderedExclusion& m) {
            return value == 1 ? std::log(m.p[site]) : std::log1p(-m.p[site]);
          },
          [&](const ColoredExclusion& m) {
            const double z = (m.colors - 1) * m.p[site] + 1.0;
            return (value >= 1 ? std::log(m.p[site]) : std::log1p(-m.p[site])) - std::log(z);
          },
          [&](const BiasedPermutations& m) {
            return -m.bias[site][static_cast<std::size_t>(value - 1)];
          },
          [](const KacSphere&) -> double {
            throw UnsupportedVariantError("no discrete site law for the Kac sphere");
          },
          [](const FlatKac&) -> double {
            throw UnsupportedVariantError("no discrete site law for the flat Kac model");
          },
      },
      spec.params);
}

StationaryMeasure stationary_measure(const ConfigurationSpace& space)
{
  const ModelSpec& spec = space.spec();
  std::vector<double> logw(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.n; ++i) acc += site_log_weight(spec, i, space[k][i]);
    logw[k] = acc;
  }
  const double log_z = log_sum_exp(logw);
  std::vector<double> w(space.size());
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = std::exp(logw[k] - log_z);
    total += w[k];
  }
  if (!(total > 0.0)) throw Error("stationary measure has zero total mass");
  for (double& x : w) x /= total;
  return StationaryMeasure(std::move(w));
}

std::vector<int> site_alphabet(const ModelSpec& spec)
{
  std::vector<int> out;
  if (std::holds_alternative<DisorderedExclusion>(spec.params)) {
    out = {0, 1};
  } else if (const auto* m = std::get_if<ColoredExclusion>(&spec.params)) {
    out.resize(static_cast<std::size_t>(m->colors) + 1);
    std::iota(out.begin(), out.end(), 0);
  } else if (std::holds_alternative<BiasedPermutations>(spec.params)) {
    out.resize(spec.n);
    std::iota(out.begin(), out.end(), 1);
  } else {
    throw UnsupportedVariantError("continuous variants have no finite alphabet");
  }
  return out;
}

std::vector<int> conserved_quantity(const ModelSpec& spec, int value)
{
  if (std::holds_alternative<DisorderedExclusion>(spec.params)) return {value};
  if (const auto* m = std::get_if<ColoredExclusion>(&spec.params)) {
    std::vector<int> xi(static_cast<std::size_t>(m->colors), 0);
    if (value >= 1) xi[static_cast<std::size_t>(value - 1)] = 1;
    return xi;
  }
  if (std::holds_alternative<BiasedPermutations>(spec.params)) {
    std::vector<int> xi(spec.n, 0);
    xi[static_cast<std::size_t>(value - 1)] = 1;
    return xi;
  }
  throw UnsupportedVariantError("continuous variants have no discrete conservation law");
}

std::vector<std::pair<Configuration, double>> conditioned_local_law(
    const ModelSpec& spec, const Configuration& eta, std::span<const std::size_t> sites)
{
  if (eta.size() != spec.n) throw ShapeError("configuration length does not match N");
  const auto alphabet = site_alphabet(spec);

  auto add = [](std::vector<int>& acc, const std::vector<int>& x) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += x[k];
  };
  std::vector<int> target(conserved_quantity(spec, alphabet.front()).size(), 0);
  for (std::size_t i : sites) add(target, conserved_quantity(spec, eta[i]));

  // Odometer over alphabet^|sites|.
  std::vector<std::size_t> digit(sites.size(), 0);
  std::vector<std::pair<Configuration, double>> law;
  std::vector<double> logw;
  while (true) {
    Configuration x = eta;
    std::vector<int> sum(target.size(), 0);
    double lw = 0.0;
    for (std::size_t a = 0; a < sites.size(); ++a) {
      x[sites[a]] = alphabet[digit[a]];
      add(sum, conserved_quantity(spec, x[sites[a]]));
      lw += site_log_weight(spec, sites[a], x[sites[a]]);
    }
    if (sum == target) {
      law.emplace_back(std::move(x), 0.0);
      logw.push_back(lw);
    }
    std::size_t a = 0;
    while (a < digit.size() && ++digit[a] == alphabet.size()) digit[a++] = 0;
    if (a == digit.size()) break;
  }
  const double log_z = log_sum_exp(logw);
  for (std::size_t k = 0; k < law.size(); ++k) law[k].second = std::exp(logw[k] - log_z);
  std::sort(law.begin(), law.end());
  return law;
}

OccupancyProjection occupancy_projection(const ConfigurationSpace& space)
{
  if (!std::holds_alternative<ColoredExclusion>(space.spec().params))
    throw UnsupportedVariantError("occupancy projection needs the colored exclusion variant");

  OccupancyProjection out;
  out.psi.reserve(space.size());
  std::map<Configuration, std::size_t> ids;
  for (const auto& eta : space.states()) {
    Configuration psi(eta.size());
    std::transform(eta.begin(), eta.end(), psi.begin(), [](int v) { return v >= 1 ? 1 : 0; });
    ids.emplace(psi, 0);
    out.psi.push_back(std::move(psi));
  }
  std::size_t next = 0;
  for (auto& [psi, id] : ids) {
    id = next++;
    out.classes.push_back(psi);
  }
  out.class_of.reserve(space.size());
  for (const auto& psi : out.psi) out.class_of.push_back(ids.at(psi));
  return out;
}

}  // namespace cgap

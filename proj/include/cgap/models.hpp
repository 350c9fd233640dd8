#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace cgap {

// Per-variant parameters. Site indices are 0-based throughout the library.

/// Bernoulli(p_i) occupation conditioned on a fixed particle count.
struct DisorderedExclusion
{
  std::vector<double> p;
  int particles = 0;
};

/// m colors; site law mu_i(k) proportional to p_i for k >= 1 and 1 - p_i for k = 0.
struct ColoredExclusion
{
  std::vector<double> p;
  int colors = 1;
  int gamma = 1;            ///< stirring weight, 0 or 1
  std::vector<int> counts;  ///< particles of each color, size == colors
};

/// Permutations of {1..N}; site i holds value j with weight exp(-bias[i][j-1]).
struct BiasedPermutations
{
  std::vector<std::vector<double>> bias;
};

struct KacSphere
{
  double radius_sq = 1.0;
};

struct FlatKac
{
  double mass = 1.0;
};

using ModelParams =
    std::variant<DisorderedExclusion, ColoredExclusion, BiasedPermutations, KacSphere, FlatKac>;

enum class Variant { DisorderedExclusion, ColoredExclusion, BiasedPermutations, KacSphere, FlatKac };

std::string_view variant_name(Variant v);

struct ModelSpec
{
  std::size_t n = 2;
  ModelParams params;

  Variant variant() const { return static_cast<Variant>(params.index()); }
  bool is_finite() const;

  /// Throws ModelError/DomainError when the structural invariants fail. Conservation
  /// values that leave the space empty are reported by enumerate() instead.
  void validate() const;

  static ModelSpec exclusion(std::vector<double> p, int particles);
  static ModelSpec colored(std::vector<double> p, int colors, int gamma, std::vector<int> counts);
  static ModelSpec permutations(std::vector<std::vector<double>> bias);
  static ModelSpec uniform_permutations(std::size_t n);
  static ModelSpec kac_sphere(std::size_t n, double radius_sq = 1.0);
  static ModelSpec flat_kac(std::size_t n, double mass = 1.0);
};

/// Global density (occupied sites / N) for exclusion variants.
double global_density(const ModelSpec& spec);

/// Copy of an exclusion spec with another particle count.
ModelSpec with_particles(const ModelSpec& spec, int particles);
/// Copy of a colored spec with other color counts.
ModelSpec with_counts(const ModelSpec& spec, std::vector<int> counts);

using Configuration = std::vector<int>;

struct EnumerationOptions
{
  std::size_t max_permutation_n = 8;
};

/// Lexicographically ordered enumeration of the conditioned state space.
class ConfigurationSpace
{
 public:
  ConfigurationSpace(ModelSpec spec, std::vector<Configuration> states);

  const ModelSpec& spec() const { return spec_; }
  std::size_t size() const { return states_.size(); }
  std::size_t sites() const { return spec_.n; }
  bool is_degenerate() const { return states_.size() == 1; }

  const Configuration& operator[](std::size_t k) const { return states_[k]; }
  const std::vector<Configuration>& states() const { return states_; }

  std::optional<std::size_t> find(const Configuration& eta) const;
  /// Throws DomainError when eta is not in the space.
  std::size_t index_of(const Configuration& eta) const;

 private:
  ModelSpec spec_;
  std::vector<Configuration> states_;
};

ConfigurationSpace enumerate(const ModelSpec& spec, const EnumerationOptions& options = {});

/// Number of states the conservation law admits, computed combinatorially.
std::size_t expected_cardinality(const ModelSpec& spec);

/// Normalized weights aligned with a ConfigurationSpace.
class StationaryMeasure
{
 public:
  explicit StationaryMeasure(std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t k) const { return weights_[k]; }
  std::span<const double> weights() const { return weights_; }

  double expectation(std::span<const double> f) const;
  double inner(std::span<const double> f, std::span<const double> g) const;
  double variance(std::span<const double> f) const;

 private:
  std::vector<double> weights_;
};

StationaryMeasure stationary_measure(const ConfigurationSpace& space);

/// Unnormalized log single-site weight log mu_i(value).
double site_log_weight(const ModelSpec& spec, std::size_t site, int value);

/// Values a single site may take.
std::vector<int> site_alphabet(const ModelSpec& spec);

/// Conserved quantity xi(value) of one site.
std::vector<int> conserved_quantity(const ModelSpec& spec, int value);

/// Product law over `sites` conditioned on the conservation law given eta outside
/// `sites`, computed from the single-site laws (not from an enumerated measure).
/// Returns completions of eta with their conditional probabilities, in
/// lexicographic order of the completed configuration.
std::vector<std::pair<Configuration, double>> conditioned_local_law(
    const ModelSpec& spec, const Configuration& eta, std::span<const std::size_t> sites);

struct OccupancyProjection
{
  std::vector<Configuration> psi;     ///< psi of each state, aligned with the space
  std::vector<std::size_t> class_of;  ///< psi-class index of each state
  std::vector<Configuration> classes; ///< distinct psi values, lexicographic
};

/// psi_i = 1 iff eta_i >= 1. Colored variant only.
OccupancyProjection occupancy_projection(const ConfigurationSpace& space);

}  // namespace cgap

#pragma once

#include "cgap/generator.hpp"
#include "cgap/rational.hpp"
#include "cgap/spectra.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cgap {

enum class BoundKind { Lower, Upper, Equal };

/// One checked inequality or identity. For lower bounds margin = measured - bound,
/// for upper bounds margin = bound - measured, for identities margin = -|difference|;
/// pass holds when margin >= -tolerance (or by exact comparison for rational checks).
struct BoundReport
{
  std::string group;
  std::string name;
  std::map<std::string, double> inputs;
  BoundKind kind = BoundKind::Lower;
  double bound = 0.0;
  double measured = 0.0;
  double margin = 0.0;
  double tolerance = 1e-9;
  bool asserted = true;  ///< observational reports never fail a suite
  bool pass = true;
};

BoundReport make_report(std::string group, std::string name, std::map<std::string, double> inputs,
                        BoundKind kind, double bound, double measured, double tolerance);
/// Identity checked in exact arithmetic; tolerance is reported as 0.
BoundReport make_exact_report(std::string group, std::string name, std::map<std::string, double> inputs,
                              const Rational& bound, const Rational& measured);

/// (3 lambda3 - 1)(1 - 2/N) + 1/N
double reduction_bound(double lambda3, std::size_t n);
Rational reduction_bound(const Rational& lambda3, std::size_t n);
/// (4 lambda4 - 1)(1/2 - 1/N) + 1/N
double clique4_bound(double lambda4, std::size_t n);
Rational clique4_bound(const Rational& lambda4, std::size_t n);

/// (2/9)(1 + xyz / ((1-x)(1-y)(1-z)))
double det_p_formula(double x, double y, double z);

/// Position law (x, y, z) of the single particle on three sites with densities p.
std::array<double, 3> three_site_weights(double p1, double p2, double p3);

/// Eigenvalues of P, descending (P is reversible for (x, y, z), so they are real).
std::array<double, 3> p_matrix_eigenvalues(double x, double y, double z);

/// Copy of a finite family spec restricted to its first n sites (p, or the n x n
/// corner of the bias table). Throws DomainError if the family has fewer sites.
ModelSpec truncated(const ModelSpec& family, std::size_t n);

/// Smallest gap of the three-site chains (1/3) sum_{b in T} D_b restricted to each
/// F_T class, over every triangle T of the instance. Needs an average-type generator.
double triangle_gap_infimum(const CollisionGenerator& gen);

/// |sum_{b~b'} nu[D_b f D_b' f] - (sum_T sum_{b,b' in T} nu[D_b f D_b' f]
///  - (N-3) sum_b nu[(D_b f)^2])|, relative to the largest term.
double triangle_identity_residual(const CollisionGenerator& gen, const Eigen::VectorXd& f);

struct ReductionOptions
{
  std::size_t n_min = 4;
  std::size_t n_max = 6;
  std::optional<double> lambda3;  ///< overrides the computed bar-lambda(3)
  double tol = 1e-9;
  double identity_tol = 1e-10;
  std::uint64_t seed = 0;
  SpectrumOptions spectrum;
};

/// bar-lambda(3) from every triangle class of the n_max instance over all omega, then
/// lambda(N, omega) >= reduction_bound(bar-lambda(3), N) for every N and omega, plus
/// the triangle identity on one random function.
std::vector<BoundReport> verify_reduction_theorem(const ModelSpec& family, const ReductionOptions& options = {});

/// Gap versus P, trace, determinant and the 1/3 bound for one particle (and, via
/// particle-hole symmetry, one hole) on three sites.
std::vector<BoundReport> verify_exclusion_three_site(double p1, double p2, double p3, double tol = 1e-10);

struct ColoredOptions
{
  double tol = 1e-9;
  double h0_tol = 1e-8;
  double detailed_balance_tol = 1e-12;
  double construction_tol = 1e-14;
  double gamma1_spread = 2.0;
  double gamma0_spread = 3.0;
  SpectrumOptions spectrum;
};

/// gamma = 0 and gamma = 1 sweeps over color counts, with the indicator upper bound,
/// the H0 split and the spread of g / (1 - rho).
std::vector<BoundReport> verify_colored_bounds(std::span<const double> p, std::size_t colors,
                                               std::span<const Omega> sweep, const ColoredOptions& options = {});

/// Var(f) <= M Var0(f) (both ways), Dirichlet forms within M^3, gaps within M^4, where
/// M bounds the density ratio nu / nu0 in both directions.
std::vector<BoundReport> density_ratio_comparison(const CollisionGenerator& gen, const CollisionGenerator& gen0,
                                                  std::span<const Eigen::VectorXd> samples, double tol = 1e-9);

/// Structural properties of one finite instance: row sums, D_b^2 = -D_b, commutation
/// of disjoint pairs, non-interference of the conditioned laws, and the variational
/// inequality for `samples` random functions.
std::vector<BoundReport> property_checks(const ModelSpec& spec, std::uint64_t seed, std::size_t samples = 100,
                                         const Tolerances& tol = {});

/// Uniformly drawn disorder in [eps, 1 - eps].
std::vector<double> random_densities(std::size_t n, double eps, std::uint64_t seed);

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_groups()
{
  static const std::vector<std::string> names = {"kac",       "flat-kac", "transpositions", "det-p",
                                                 "three-site", "reduction", "clique4",       "colored",
                                                 "density-ratio", "properties", "spec"};
  return names;
}

struct SuiteOptions
{
  std::uint64_t seed = 0;
  double tol = 1e-9;
  std::size_t threads = 1;
  std::optional<double> lambda3;
  std::vector<std::string> only;  ///< empty runs every group
  std::optional<ModelSpec> spec;  ///< enables the "spec" group
};

struct SuiteReport
{
  std::vector<std::string> groups;
  std::vector<BoundReport> checks;
  std::size_t failures = 0;
  bool pass() const { return failures == 0; }
};

/// Runs the selected groups in parallel; report order follows suite_groups().
/// Throws DomainError for an unknown group name.
SuiteReport run_verification_suite(const SuiteOptions& options = {});

}  // namespace cgap

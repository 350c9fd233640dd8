#pragma once

#include "cgap/generator.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace cgap {

enum class SolverMethod { Auto, Dense, Iterative };

struct SpectrumOptions
{
  SolverMethod method = SolverMethod::Auto;
  std::size_t dense_threshold = 4096;  ///< Auto picks dense at or below this many states
  std::size_t eigenvalue_count = 6;    ///< lowest eigenvalues reported by the dense path
  double residual_tol = 1e-10;
  std::size_t max_iterations = 100000;
  std::size_t krylov_dim = 120;
  double multiplicity_tol = 1e-8;
  std::uint64_t seed = 0;
};

inline constexpr double kInfiniteGap = std::numeric_limits<double>::infinity();

/// Spectral data of -L in L^2(nu).
struct SpectrumReport
{
  double gap = kInfiniteGap;             ///< +inf for a one-point space
  std::vector<double> eigenvalues;       ///< lowest eigenvalues of -L, ascending
  std::vector<double> residuals;         ///< ||S v - lambda v|| per reported pair
  std::size_t gap_multiplicity = 0;      ///< dimension of the gap eigenspace (dense path)
  std::string method;                    ///< "dense", "iterative" or "degenerate"
  double tolerance_achieved = 0.0;       ///< largest reported residual
  std::size_t iterations = 0;            ///< operator applications (iterative path)
  std::size_t states = 0;
  Eigen::VectorXd gap_function;          ///< eigenfunction of the gap, nu(f^2) = 1

  bool infinite() const { return gap == kInfiniteGap; }
};

/// S = D^{1/2} (-L) D^{-1/2}, D = diag(nu), symmetrized to remove round-off asymmetry.
Eigen::MatrixXd symmetrized_dense(const CollisionGenerator& gen);
SparseMatrix symmetrized_sparse(const CollisionGenerator& gen);

/// Smallest nonzero eigenvalue of -L. Throws ReducibleError or ConvergenceError.
SpectrumReport spectral_gap(const CollisionGenerator& gen, const SpectrumOptions& options = {});

struct VariationalReport
{
  std::size_t samples = 0;
  double worst_equi_margin = kInfiniteGap;      ///< min of nu((Lf)^2) - gap nu(f(-L)f)
  double worst_rayleigh_margin = kInfiniteGap;  ///< min of nu(f(-L)f)/Var(f) - gap
  double tolerance = 1e-10;
  bool pass = true;
};

VariationalReport variational_check(const CollisionGenerator& gen, double gap,
                                    std::span<const Eigen::VectorXd> samples, double tol = 1e-10);

/// Standard-normal test vectors, deterministic in the seed.
std::vector<Eigen::VectorXd> random_functions(std::size_t states, std::size_t count, std::uint64_t seed);

/// Split of L^2(nu) into color-blind functions H0 (functions of psi) and H0-perp.
struct H0Decomposition
{
  double gap_h0 = kInfiniteGap;    ///< gap of -L on H0 (the psi chain)
  double gap_perp = kInfiniteGap;  ///< bottom of the spectrum of -L on H0-perp
  double combined = kInfiniteGap;  ///< min of the two
  double full_gap = kInfiniteGap;
  double commutator_residual = 0.0;  ///< max |L Pi0 - Pi0 L|
  std::size_t h0_dimension = 0;
  std::size_t perp_dimension = 0;
  bool commutes = false;
  bool consistent = false;  ///< combined == full_gap within tolerance
};

H0Decomposition h0_decomposition(const CollisionGenerator& gen, const Tolerances& tol = {},
                                 double gap_tol = 1e-9);

/// Conservation value: {particles} for exclusion, color counts for colored,
/// ignored for permutations (single admissible value).
using Omega = std::vector<int>;

struct OmegaGap
{
  Omega omega;
  double rho = 0.0;
  SpectrumReport report;
};

struct GapOverOmega
{
  std::vector<OmegaGap> entries;
  double minimum = kInfiniteGap;  ///< bar-lambda(N)
};

/// Default admissible values: 0..N particles for exclusion; (k,...,k) for colored
/// (keeping gamma = 0 instances irreducible); the single value for permutations.
std::vector<Omega> default_omegas(const ModelSpec& family);

ModelSpec spec_with_omega(const ModelSpec& family, const Omega& omega);

GapOverOmega min_gap_over_omega(const ModelSpec& family, std::span<const Omega> omegas,
                                const SpectrumOptions& spectrum = {},
                                const GeneratorOptions& generator = {}, std::size_t threads = 1);

}  // namespace cgap

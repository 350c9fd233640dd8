#pragma once

#include "cgap/models.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

namespace cgap {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Unordered pair of distinct sites, stored with i < j.
struct Pair
{
  std::size_t i = 0;
  std::size_t j = 1;

  static Pair make(std::size_t a, std::size_t b);  ///< throws InvalidPairError if a == b
  friend bool operator==(const Pair&, const Pair&) = default;
};

/// All N(N-1)/2 pairs in lexicographic order.
std::vector<Pair> all_pairs(std::size_t n);

inline bool pairs_disjoint(const Pair& a, const Pair& b)
{
  return a.i != b.i && a.i != b.j && a.j != b.i && a.j != b.j;
}

/// Default numerical tolerances; every check accepting a Tolerances can override them.
struct Tolerances
{
  double row_sum = 1e-12;
  double detailed_balance = 1e-12;  ///< relative
  double projection = 1e-12;
  double construction = 1e-14;      ///< agreement between two assembly routes
  double simplex = 1e-12;
};

struct GeneratorOptions
{
  std::size_t dense_threshold = 4096;
  std::size_t threads = 1;
  EnumerationOptions enumeration;
};

/// Square generator matrix, dense at desk scale and sparse above `dense_threshold` states.
class GeneratorMatrix
{
 public:
  GeneratorMatrix() = default;
  GeneratorMatrix(std::size_t n, const std::vector<Triplet>& triplets, std::size_t dense_threshold);

  bool is_dense() const { return std::holds_alternative<Eigen::MatrixXd>(storage_); }
  std::size_t rows() const { return n_; }

  double coeff(std::size_t row, std::size_t col) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
  Eigen::MatrixXd to_dense() const;
  SparseMatrix to_sparse() const;

  /// Calls fn(row, col, value) for every stored nonzero, rows in increasing order.
  template <class Fn>
  void for_each_nonzero(Fn&& fn) const
  {
    if (const auto* d = std::get_if<Eigen::MatrixXd>(&storage_)) {
      for (Eigen::Index r = 0; r < d->rows(); ++r)
        for (Eigen::Index c = 0; c < d->cols(); ++c)
          if ((*d)(r, c) != 0.0)
            fn(static_cast<std::size_t>(r), static_cast<std::size_t>(c), (*d)(r, c));
    } else {
      const auto& s = std::get<SparseMatrix>(storage_);
      for (Eigen::Index r = 0; r < s.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(s, r); it; ++it)
          fn(static_cast<std::size_t>(r), static_cast<std::size_t>(it.col()), it.value());
    }
  }

 private:
  std::size_t n_ = 0;
  std::variant<Eigen::MatrixXd, SparseMatrix> storage_;
};

enum class GeneratorKind {
  Average,         ///< (1/N) sum_b (E_b - Id) from conditional expectations
  ExclusionRates,  ///< explicit exclusion rates c_b
  ColoredRates,    ///< explicit colored rates c_b^gamma
};

/// Generator L on an enumerated space, including the 1/N prefactor.
class CollisionGenerator
{
 public:
  CollisionGenerator(ConfigurationSpace space, StationaryMeasure measure, GeneratorMatrix matrix,
                     GeneratorKind kind, int gamma = 1);

  const ConfigurationSpace& space() const { return space_; }
  const StationaryMeasure& measure() const { return measure_; }
  const ModelSpec& spec() const { return space_.spec(); }
  const GeneratorMatrix& matrix() const { return matrix_; }
  GeneratorKind kind() const { return kind_; }
  int gamma() const { return gamma_; }
  std::size_t size() const { return space_.size(); }
  std::size_t pair_count() const { return space_.sites() * (space_.sites() - 1) / 2; }
  bool is_degenerate() const { return space_.is_degenerate(); }

  /// True when L is also (1/N) sum_b D_b, so projection-form identities apply.
  bool is_average_type() const;

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return matrix_.apply(f); }

 private:
  ConfigurationSpace space_;
  StationaryMeasure measure_;
  GeneratorMatrix matrix_;
  GeneratorKind kind_;
  int gamma_;
};

/// Partition of the space into F_b classes (states agreeing outside b).
/// Each class is sorted; classes are ordered by their smallest index.
std::vector<std::vector<std::size_t>> pair_classes(const ConfigurationSpace& space, Pair b);

struct PairOperator
{
  Pair pair;
  SparseMatrix matrix;  ///< E_b on state indices
};

PairOperator conditional_expectation_operator(const ConfigurationSpace& space,
                                              const StationaryMeasure& measure, Pair b);

/// D_b f = E_b f - f, without materializing E_b.
Eigen::VectorXd apply_pair_difference(const ConfigurationSpace& space,
                                      const StationaryMeasure& measure, Pair b,
                                      const Eigen::VectorXd& f);

CollisionGenerator build_average_generator(const ConfigurationSpace& space,
                                           const StationaryMeasure& measure,
                                           const GeneratorOptions& options = {});

CollisionGenerator build_exclusion_generator(const ModelSpec& spec,
                                             const GeneratorOptions& options = {});

/// Throws ReducibleError when the chain has more than one communicating class.
CollisionGenerator build_colored_generator(const ModelSpec& spec, int gamma,
                                           const GeneratorOptions& options = {});

/// Natural generator of a finite variant: exclusion rates, colored rates with the
/// spec's gamma, or the average generator for permutations.
CollisionGenerator build_generator(const ModelSpec& spec, const GeneratorOptions& options = {});

/// Exclusion rate c_b(eta) for occupation variables eta.
double exclusion_rate(std::span<const double> p, const Configuration& eta, Pair b);
/// Colored rate c_b^gamma(eta) = c_b(psi) + (gamma/2) 1{psi_i = psi_j}.
double colored_rate(std::span<const double> p, int gamma, const Configuration& eta, Pair b);

Configuration swapped(const Configuration& eta, Pair b);

struct DirichletForm
{
  double value = 0.0;                      ///< -f^T diag(nu) L f
  std::optional<double> rate_form;         ///< (1/2N) sum_b nu[c_b (f^b - f)^2]
  std::optional<double> projection_form;   ///< (1/N) sum_b nu[(D_b f)^2]
};

DirichletForm dirichlet_form(const CollisionGenerator& gen, const Eigen::VectorXd& f);

/// Number of communicating classes of the nonzero off-diagonal transition graph.
std::size_t communicating_classes(const CollisionGenerator& gen);

struct GeneratorDiagnostics
{
  double max_row_sum = 0.0;
  double min_off_diagonal = 0.0;
  double max_detailed_balance = 0.0;  ///< relative residual
};

GeneratorDiagnostics diagnose(const CollisionGenerator& gen);

/// Transition matrix P = L + Id of the one-particle chain on three sites.
Eigen::Matrix3d p_matrix_three_site(double x, double y, double z, const Tolerances& tol = {});

/// MatrixMarket coordinate file of L plus a JSON side file with states and weights.
void write_matrix_market(const CollisionGenerator& gen, const std::filesystem::path& matrix_path,
                         const std::filesystem::path& measure_path);

}  // namespace cgap

#include "cgap/generator.hpp"

#include "cgap/errors.hpp"
#include "cgap/model_io.hpp"
#include "cgap/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace cgap {

Pair Pair::make(std::size_t a, std::size_t b)
{
  if (a == b) throw InvalidPairError("pair needs two distinct sites, got " + std::to_string(a) + " twice");
  return a < b ? Pair{a, b} : Pair{b, a};
}

std::vector<Pair> all_pairs(std::size_t n)
{
  std::vector<Pair> out;
  out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.push_back({i, j});
  return out;
}

Configuration swapped(const Configuration& eta, Pair b)
{
  Configuration out = eta;
  std::swap(out[b.i], out[b.j]);
  return out;
}

// ---------------------------------------------------------------------------
// GeneratorMatrix

GeneratorMatrix::GeneratorMatrix(std::size_t n, const std::vector<Triplet>& triplets,
                                 std::size_t dense_threshold)
    : n_(n)
{
  SparseMatrix s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.setFromTriplets(triplets.begin(), triplets.end());
  s.makeCompressed();
  if (n <= dense_threshold)
    storage_ = Eigen::MatrixXd(s);
  else
    storage_ = std::move(s);
}

double GeneratorMatrix::coeff(std::size_t row, std::size_t col) const
{
  const auto r = static_cast<Eigen::Index>(row);
  const auto c = static_cast<Eigen::Index>(col);
  if (const auto* d = std::get_if<Eigen::MatrixXd>(&storage_)) return (*d)(r, c);
  return std::get<SparseMatrix>(storage_).coeff(r, c);
}

Eigen::VectorXd GeneratorMatrix::apply(const Eigen::VectorXd& f) const
{
  if (static_cast<std::size_t>(f.size()) != n_) throw ShapeError("vector length does not match generator");
  if (const auto* d = std::get_if<Eigen::MatrixXd>(&storage_)) return (*d) * f;
  return std::get<SparseMatrix>(storage_) * f;
}

Eigen::MatrixXd GeneratorMatrix::to_dense() const
{
  if (const auto* d = std::get_if<Eigen::MatrixXd>(&storage_)) return *d;
  return Eigen::MatrixXd(std::get<SparseMatrix>(storage_));
}

SparseMatrix GeneratorMatrix::to_sparse() const
{
  if (const auto* d = std::get_if<Eigen::MatrixXd>(&storage_)) return d->sparseView();
  return std::get<SparseMatrix>(storage_);
}

// ---------------------------------------------------------------------------
// CollisionGenerator

CollisionGenerator::CollisionGenerator(ConfigurationSpace space, StationaryMeasure measure,
                                       GeneratorMatrix matrix, GeneratorKind kind, int gamma)
    : space_(std::move(space)),
      measure_(std::move(measure)),
      matrix_(std::move(matrix)),
      kind_(kind),
      gamma_(gamma)
{
  if (measure_.size() != space_.size() || matrix_.rows() != space_.size())
    throw ShapeError("generator, measure and space sizes differ");
}

bool CollisionGenerator::is_average_type() const
{
  if (kind_ != GeneratorKind::ColoredRates) return true;
  const auto& m = std::get<ColoredExclusion>(spec().params);
  return gamma_ == 1 || m.colors == 1;
}

// ---------------------------------------------------------------------------
// Pair classes and conditional expectations

std::vector<std::vector<std::size_t>> pair_classes(const ConfigurationSpace& space, Pair b)
{
  if (b.i == b.j) throw InvalidPairError("pair needs two distinct sites");
  if (b.j >= space.sites()) throw InvalidPairError("pair site out of range");
  const ModelSpec& spec = space.spec();
  const auto alphabet = site_alphabet(spec);
  std::vector<std::vector<int>> xi;
  for (int a : alphabet) xi.push_back(conserved_quantity(spec, a));
  auto letter = [&](int v) {
    return static_cast<std::size_t>(std::find(alphabet.begin(), alphabet.end(), v) - alphabet.begin());
  };

  std::vector<char> seen(space.size(), 0);
  std::vector<std::vector<std::size_t>> classes;
  for (std::size_t k = 0; k < space.size(); ++k) {
    if (seen[k]) continue;
    const Configuration& eta = space[k];
    const auto& xa = xi[letter(eta[b.i])];
    const auto& xc = xi[letter(eta[b.j])];
    std::vector<std::size_t> members;
    Configuration probe = eta;
    for (std::size_t a = 0; a < alphabet.size(); ++a)
      for (std::size_t c = 0; c < alphabet.size(); ++c) {
        bool same = true;
        for (std::size_t d = 0; d < xa.size() && same; ++d)
          same = xi[a][d] + xi[c][d] == xa[d] + xc[d];
        if (!same) continue;
        probe[b.i] = alphabet[a];
        probe[b.j] = alphabet[c];
        if (auto idx = space.find(probe)) members.push_back(*idx);
      }
    std::sort(members.begin(), members.end());
    for (std::size_t m : members) seen[m] = 1;
    classes.push_back(std::move(members));
  }
  return classes;
}

PairOperator conditional_expectation_operator(const ConfigurationSpace& space,
                                              const StationaryMeasure& measure, Pair b)
{
  b = Pair::make(b.i, b.j);
  std::vector<Triplet> t;
  for (const auto& cls : pair_classes(space, b)) {
    double z = 0.0;
    for (std::size_t k : cls) z += measure[k];
    for (std::size_t r : cls)
      for (std::size_t c : cls)
        t.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c), measure[c] / z);
  }
  const auto n = static_cast<Eigen::Index>(space.size());
  SparseMatrix e(n, n);
  e.setFromTriplets(t.begin(), t.end());
  return {b, std::move(e)};
}

Eigen::VectorXd apply_pair_difference(const ConfigurationSpace& space,
                                      const StationaryMeasure& measure, Pair b,
                                      const Eigen::VectorXd& f)
{
  if (static_cast<std::size_t>(f.size()) != space.size()) throw ShapeError("vector length does not match space");
  Eigen::VectorXd out(f.size());
  for (const auto& cls : pair_classes(space, b)) {
    double z = 0.0, acc = 0.0;
    for (std::size_t k : cls) {
      z += measure[k];
      acc += measure[k] * f(static_cast<Eigen::Index>(k));
    }
    for (std::size_t k : cls) out(static_cast<Eigen::Index>(k)) = acc / z - f(static_cast<Eigen::Index>(k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

std::vector<Triplet> concat(std::vector<std::vector<Triplet>>& parts)
{
  std::vector<Triplet> out;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

void require_connected(const CollisionGenerator& gen)
{
  const std::size_t comps = communicating_classes(gen);
  if (comps > 1)
    throw ReducibleError("generator is reducible: " + std::to_string(comps) +
                             " communicating classes (no stirring and no empty sites?)",
                         comps);
}

// Assembles (1/N) sum_b c_b(eta) (f(eta^b) - f(eta)) from a rate function.
template <class Rate>
std::vector<Triplet> swap_rate_triplets(const ConfigurationSpace& space, const GeneratorOptions& options,
                                        Rate&& rate)
{
  const auto pairs = all_pairs(space.sites());
  const double inv_n = 1.0 / static_cast<double>(space.sites());
  std::vector<std::vector<Triplet>> parts(pairs.size());
  parallel_for(pairs.size(), options.threads, [&](std::size_t q) {
    const Pair b = pairs[q];
    auto& t = parts[q];
    for (std::size_t k = 0; k < space.size(); ++k) {
      const Configuration& eta = space[k];
      if (eta[b.i] == eta[b.j]) continue;
      const double c = rate(eta, b);
      if (c == 0.0) continue;
      const std::size_t target = space.index_of(swapped(eta, b));
      const auto r = static_cast<Eigen::Index>(k);
      t.emplace_back(r, static_cast<Eigen::Index>(target), c * inv_n);
      t.emplace_back(r, r, -c * inv_n);
    }
  });
  return concat(parts);
}

}  // namespace

CollisionGenerator build_average_generator(const ConfigurationSpace& space,
                                           const StationaryMeasure& measure,
                                           const GeneratorOptions& options)
{
  if (measure.size() != space.size()) throw ShapeError("measure does not match space");
  const auto pairs = all_pairs(space.sites());
  const double inv_n = 1.0 / static_cast<double>(space.sites());
  std::vector<std::vector<Triplet>> parts(pairs.size());
  parallel_for(pairs.size(), options.threads, [&](std::size_t q) {
    auto& t = parts[q];
    for (const auto& cls : pair_classes(space, pairs[q])) {
      if (cls.size() < 2) continue;
      double z = 0.0;
      for (std::size_t k : cls) z += measure[k];
      for (std::size_t r : cls) {
        double leave = 0.0;
        for (std::size_t c : cls) {
          if (c == r) continue;
          const double w = measure[c] / z * inv_n;
          t.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c), w);
          leave += w;
        }
        t.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r), -leave);
      }
    }
  });
  int gamma = 1;
  if (const auto* m = std::get_if<ColoredExclusion>(&space.spec().params)) gamma = m->gamma;
  return CollisionGenerator(space, measure,
                            GeneratorMatrix(space.size(), concat(parts), options.dense_threshold),
                            GeneratorKind::Average, gamma);
}

double exclusion_rate(std::span<const double> p, const Configuration& eta, Pair b)
{
  const double pi = p[b.i], pj = p[b.j];
  const double wi = pi * (1.0 - pj);  // weight of "particle at i"
  const double wj = pj * (1.0 - pi);
  const double hi = static_cast<double>(eta[b.i]);
  const double hj = static_cast<double>(eta[b.j]);
  return (wi * hj * (1.0 - hi) + wj * hi * (1.0 - hj)) / (wi + wj);
}

double colored_rate(std::span<const double> p, int gamma, const Configuration& eta, Pair b)
{
  Configuration psi(eta.size());
  psi[b.i] = eta[b.i] >= 1 ? 1 : 0;
  psi[b.j] = eta[b.j] >= 1 ? 1 : 0;
  return exclusion_rate(p, psi, b) + (psi[b.i] == psi[b.j] ? 0.5 * gamma : 0.0);
}

CollisionGenerator build_exclusion_generator(const ModelSpec& spec, const GeneratorOptions& options)
{
  const auto* m = std::get_if<DisorderedExclusion>(&spec.params);
  if (!m) throw UnsupportedVariantError("exclusion generator needs the disordered exclusion variant");
  auto space = enumerate(spec, options.enumeration);
  auto measure = stationary_measure(space);
  auto triplets = swap_rate_triplets(space, options, [&](const Configuration& eta, Pair b) {
    return exclusion_rate(m->p, eta, b);
  });
  GeneratorMatrix matrix(space.size(), triplets, options.dense_threshold);
  return CollisionGenerator(std::move(space), std::move(measure), std::move(matrix),
                            GeneratorKind::ExclusionRates);
}

CollisionGenerator build_colored_generator(const ModelSpec& spec, int gamma, const GeneratorOptions& options)
{
  const auto* m = std::get_if<ColoredExclusion>(&spec.params);
  if (!m) throw UnsupportedVariantError("colored generator needs the colored exclusion variant");
  if (gamma != 0 && gamma != 1) throw DomainError("gamma must be 0 or 1");
  auto space = enumerate(spec, options.enumeration);
  auto measure = stationary_measure(space);
  auto triplets = swap_rate_triplets(space, options, [&](const Configuration& eta, Pair b) {
    return colored_rate(m->p, gamma, eta, b);
  });
  GeneratorMatrix matrix(space.size(), triplets, options.dense_threshold);
  CollisionGenerator gen(std::move(space), std::move(measure), std::move(matrix),
                         GeneratorKind::ColoredRates, gamma);
  require_connected(gen);
  return gen;
}

CollisionGenerator build_generator(const ModelSpec& spec, const GeneratorOptions& options)
{
  switch (spec.variant()) {
    case Variant::DisorderedExclusion: return build_exclusion_generator(spec, options);
    case Variant::ColoredExclusion:
      return build_colored_generator(spec, std::get<ColoredExclusion>(spec.params).gamma, options);
    case Variant::BiasedPermutations: {
      auto space = enumerate(spec, options.enumeration);
      auto measure = stationary_measure(space);
      return build_average_generator(space, measure, options);
    }
    default:
      throw UnsupportedVariantError(std::string("no finite generator for ") +
                                    std::string(variant_name(spec.variant())));
  }
}

// ---------------------------------------------------------------------------
// Dirichlet forms

DirichletForm dirichlet_form(const CollisionGenerator& gen, const Eigen::VectorXd& f)
{
  if (static_cast<std::size_t>(f.size()) != gen.size()) throw ShapeError("function length does not match generator");
  const auto& space = gen.space();
  const auto& nu = gen.measure();
  const double inv_n = 1.0 / static_cast<double>(space.sites());
  const Eigen::VectorXd lf = gen.apply(f);

  DirichletForm out;
  for (std::size_t k = 0; k < space.size(); ++k)
    out.value -= nu[k] * f(static_cast<Eigen::Index>(k)) * lf(static_cast<Eigen::Index>(k));

  const auto pairs = all_pairs(space.sites());
  double rate_sum = 0.0;
  if (gen.kind() == GeneratorKind::Average) {
    // Average kernel: the rate of eta -> eta' inside an F_b class is nu(eta')/nu(class).
    for (const Pair& b : pairs)
      for (const auto& cls : pair_classes(space, b)) {
        double z = 0.0;
        for (std::size_t k : cls) z += nu[k];
        for (std::size_t r : cls)
          for (std::size_t c : cls) {
            const double d = f(static_cast<Eigen::Index>(c)) - f(static_cast<Eigen::Index>(r));
            rate_sum += nu[r] * nu[c] / z * d * d;
          }
      }
  } else {
    const ModelSpec& spec = space.spec();
    for (const Pair& b : pairs)
      for (std::size_t k = 0; k < space.size(); ++k) {
        const Configuration& eta = space[k];
        if (eta[b.i] == eta[b.j]) continue;
        double c = 0.0;
        if (const auto* m = std::get_if<DisorderedExclusion>(&spec.params))
          c = exclusion_rate(m->p, eta, b);
        else
          c = colored_rate(std::get<ColoredExclusion>(spec.params).p, gen.gamma(), eta, b);
        const double d = f(static_cast<Eigen::Index>(space.index_of(swapped(eta, b)))) -
                         f(static_cast<Eigen::Index>(k));
        rate_sum += nu[k] * c * d * d;
      }
  }
  out.rate_form = 0.5 * inv_n * rate_sum;

  if (gen.is_average_type()) {
    double proj = 0.0;
    for (const Pair& b : pairs) {
      const Eigen::VectorXd db = apply_pair_difference(space, nu, b, f);
      for (std::size_t k = 0; k < space.size(); ++k)
        proj += nu[k] * db(static_cast<Eigen::Index>(k)) * db(static_cast<Eigen::Index>(k));
    }
    out.projection_form = inv_n * proj;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structure checks

std::size_t communicating_classes(const CollisionGenerator& gen)
{
  std::vector<std::size_t> parent(gen.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t comps = gen.size();
  gen.matrix().for_each_nonzero([&](std::size_t r, std::size_t c, double v) {
    if (r == c || v <= 0.0) return;
    const std::size_t a = root(r), b = root(c);
    if (a != b) {
      parent[a] = b;
      --comps;
    }
  });
  return comps;
}

GeneratorDiagnostics diagnose(const CollisionGenerator& gen)
{
  GeneratorDiagnostics d;
  std::vector<double> row_sum(gen.size(), 0.0);
  const auto& nu = gen.measure();
  const auto& mat = gen.matrix();
  mat.for_each_nonzero([&](std::size_t r, std::size_t c, double v) {
    row_sum[r] += v;
    if (r == c) return;
    d.min_off_diagonal = std::min(d.min_off_diagonal, v);
    const double forward = nu[r] * v;
    const double backward = nu[c] * mat.coeff(c, r);
    const double scale = std::max(std::abs(forward), std::abs(backward));
    if (scale > 0.0) d.max_detailed_balance = std::max(d.max_detailed_balance, std::abs(forward - backward) / scale);
  });
  for (double s : row_sum) d.max_row_sum = std::max(d.max_row_sum, std::abs(s));
  return d;
}

Eigen::Matrix3d p_matrix_three_site(double x, double y, double z, const Tolerances& tol)
{
  if (!(x > 0.0 && y > 0.0 && z > 0.0) || std::abs(x + y + z - 1.0) > tol.simplex)
    throw DomainError("p_matrix_three_site needs x, y, z > 0 summing to 1");
  const double xy = x + y, xz = x + z, yz = y + z;
  Eigen::Matrix3d p;
  p << 1.0 + x / xy + x / xz, y / xy, z / xz,
       x / xy, 1.0 + y / xy + y / yz, z / yz,
       x / xz, y / yz, 1.0 + z / xz + z / yz;
  return p / 3.0;
}

void write_matrix_market(const CollisionGenerator& gen, const std::filesystem::path& matrix_path,
                         const std::filesystem::path& measure_path)
{
  std::size_t nnz = 0;
  gen.matrix().for_each_nonzero([&](std::size_t, std::size_t, double) { ++nnz; });

  std::FILE* out = std::fopen(matrix_path.string().c_str(), "w");
  if (!out) throw Error("cannot write " + matrix_path.string());
  std::fprintf(out, "%%%%MatrixMarket matrix coordinate real general\n");
  std::fprintf(out, "%zu %zu %zu\n", gen.size(), gen.size(), nnz);
  gen.matrix().for_each_nonzero([&](std::size_t r, std::size_t c, double v) {
    std::fprintf(out, "%zu %zu %.17g\n", r + 1, c + 1, v);
  });
  std::fclose(out);

  nlohmann::json side;
  side["spec"] = model_spec_to_json(gen.spec());
  side["states"] = gen.space().states();
  side["weights"] = std::vector<double>(gen.measure().weights().begin(), gen.measure().weights().end());
  std::ofstream js(measure_path);
  if (!js) throw Error("cannot write " + measure_path.string());
  js << side.dump(2) << '\n';
}

}  // namespace cgap

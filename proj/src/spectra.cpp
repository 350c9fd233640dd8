#include "cgap/spectra.hpp"

#include "cgap/errors.hpp"
#include "cgap/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>

namespace cgap {

namespace {

Eigen::VectorXd sqrt_weights(const StationaryMeasure& nu)
{
  Eigen::VectorXd s(static_cast<Eigen::Index>(nu.size()));
  for (std::size_t k = 0; k < nu.size(); ++k) s(static_cast<Eigen::Index>(k)) = std::sqrt(nu[k]);
  return s;
}

void require_irreducible(const CollisionGenerator& gen)
{
  const std::size_t comps = communicating_classes(gen);
  if (comps > 1)
    throw ReducibleError("cannot compute a spectral gap: chain has " + std::to_string(comps) +
                             " communicating classes",
                         comps);
}

struct LanczosResult
{
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;
  std::size_t iterations = 0;
};

// Smallest eigenpair of the symmetric operator `a` on the complement of the unit
// vector `deflate`. Restarted Lanczos with full reorthogonalization; each restart
// continues from the current best Ritz vector.
LanczosResult lanczos_smallest(const SparseMatrix& a, const Eigen::VectorXd& deflate,
                               const SpectrumOptions& opt)
{
  const Eigen::Index n = a.rows();
  const Eigen::Index m = std::max<Eigen::Index>(
      1, std::min<Eigen::Index>(static_cast<Eigen::Index>(opt.krylov_dim), n - 1));

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = normal(rng);
  v -= deflate * deflate.dot(v);
  v.normalize();

  LanczosResult out;
  Eigen::MatrixXd basis(n, m + 1);
  while (true) {
    basis.col(0) = v;
    Eigen::VectorXd alpha(m), beta(m);
    Eigen::VectorXd ritz_vec;
    double theta = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      Eigen::VectorXd w = a * basis.col(k);
      ++out.iterations;
      alpha(k) = basis.col(k).dot(w);
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);
        w -= deflate * deflate.dot(w);
      }
      beta(k) = w.norm();

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(alpha.head(k + 1), beta.head(k), Eigen::ComputeEigenvectors);
      theta = tri.eigenvalues()(0);
      const Eigen::VectorXd s = tri.eigenvectors().col(0);
      const double estimate = beta(k) * std::abs(s(k));
      const bool exhausted = beta(k) < 1e-13 || k + 1 == n - 1;

      if (estimate < opt.residual_tol || exhausted || k + 1 == m) {
        ritz_vec = basis.leftCols(k + 1) * s;
        ritz_vec.normalize();
        const double res = (a * ritz_vec - theta * ritz_vec).norm();
        if (res < opt.residual_tol || exhausted) {
          out.value = theta;
          out.vector = ritz_vec;
          out.residual = res;
          return out;
        }
        if (k + 1 == m) break;
      }
      if (out.iterations >= opt.max_iterations)
        throw ConvergenceError("Lanczos did not converge after " + std::to_string(out.iterations) +
                                   " iterations",
                               out.iterations);
      basis.col(k + 1) = w / beta(k);
    }
    if (out.iterations >= opt.max_iterations)
      throw ConvergenceError("Lanczos did not converge after " + std::to_string(out.iterations) +
                                 " iterations",
                             out.iterations);
    v = ritz_vec - deflate * deflate.dot(ritz_vec);
    v.normalize();
  }
}

}  // namespace

Eigen::MatrixXd symmetrized_dense(const CollisionGenerator& gen)
{
  const auto& nu = gen.measure();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gen.size()),
                                            static_cast<Eigen::Index>(gen.size()));
  gen.matrix().for_each_nonzero([&](std::size_t r, std::size_t c, double v) {
    s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = -v * std::sqrt(nu[r] / nu[c]);
  });
  return 0.5 * (s + s.transpose());
}

SparseMatrix symmetrized_sparse(const CollisionGenerator& gen)
{
  const auto& nu = gen.measure();
  std::vector<Triplet> t;
  gen.matrix().for_each_nonzero([&](std::size_t r, std::size_t c, double v) {
    const double w = -0.5 * v * std::sqrt(nu[r] / nu[c]);
    t.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c), w);
    t.emplace_back(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r), w);
  });
  const auto n = static_cast<Eigen::Index>(gen.size());
  SparseMatrix s(n, n);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SpectrumReport spectral_gap(const CollisionGenerator& gen, const SpectrumOptions& options)
{
  SpectrumReport rep;
  rep.states = gen.size();
  if (gen.is_degenerate()) {
    rep.method = "degenerate";
    rep.eigenvalues = {0.0};
    rep.residuals = {0.0};
    rep.gap_function = Eigen::VectorXd::Zero(1);
    return rep;
  }
  require_irreducible(gen);

  const Eigen::VectorXd root = sqrt_weights(gen.measure());
  const bool dense = options.method == SolverMethod::Dense ||
                     (options.method == SolverMethod::Auto && gen.size() <= options.dense_threshold);

  if (dense) {
    rep.method = "dense";
    const Eigen::MatrixXd s = symmetrized_dense(gen);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0);
    const auto& evals = es.eigenvalues();
    const auto& evecs = es.eigenvectors();
    rep.gap = evals(1);
    const auto count = std::min<Eigen::Index>(evals.size(), static_cast<Eigen::Index>(std::max<std::size_t>(options.eigenvalue_count, 2)));
    for (Eigen::Index k = 0; k < count; ++k) {
      rep.eigenvalues.push_back(evals(k));
      rep.residuals.push_back((s * evecs.col(k) - evals(k) * evecs.col(k)).norm());
    }
    const double band = options.multiplicity_tol * std::max(1.0, std::abs(rep.gap));
    for (Eigen::Index k = 1; k < evals.size() && std::abs(evals(k) - rep.gap) <= band; ++k)
      ++rep.gap_multiplicity;
    rep.gap_function = evecs.col(1).cwiseQuotient(root);
  } else {
    rep.method = "iterative";
    const SparseMatrix s = symmetrized_sparse(gen);
    const LanczosResult lz = lanczos_smallest(s, root, options);
    rep.gap = lz.value;
    rep.iterations = lz.iterations;
    rep.eigenvalues = {root.dot(s * root), lz.value};
    rep.residuals = {(s * root - rep.eigenvalues[0] * root).norm(), lz.residual};
    rep.gap_function = lz.vector.cwiseQuotient(root);
  }
  rep.tolerance_achieved = *std::max_element(rep.residuals.begin(), rep.residuals.end());
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<Eigen::VectorXd> random_functions(std::size_t states, std::size_t count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXd> out(count, Eigen::VectorXd(static_cast<Eigen::Index>(states)));
  for (auto& f : out)
    for (Eigen::Index k = 0; k < f.size(); ++k) f(k) = normal(rng);
  return out;
}

VariationalReport variational_check(const CollisionGenerator& gen, double gap,
                                    std::span<const Eigen::VectorXd> samples, double tol)
{
  VariationalReport rep;
  rep.tolerance = tol;
  rep.samples = samples.size();
  if (gap == kInfiniteGap) return rep;  // one-point space: L = 0, nothing to compare
  const auto& nu = gen.measure();
  for (const auto& f : samples) {
    const Eigen::VectorXd lf = gen.apply(f);
    double energy = 0.0, lf_sq = 0.0;
    for (std::size_t k = 0; k < nu.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      energy -= nu[k] * f(i) * lf(i);
      lf_sq += nu[k] * lf(i) * lf(i);
    }
    rep.worst_equi_margin = std::min(rep.worst_equi_margin, lf_sq - gap * energy);
    const double var = nu.variance(std::span<const double>(f.data(), static_cast<std::size_t>(f.size())));
    if (var > 1e-300) rep.worst_rayleigh_margin = std::min(rep.worst_rayleigh_margin, energy / var - gap);
  }
  rep.pass = rep.worst_equi_margin >= -tol && rep.worst_rayleigh_margin >= -tol;
  return rep;
}

// ---------------------------------------------------------------------------

H0Decomposition h0_decomposition(const CollisionGenerator& gen, const Tolerances& tol, double gap_tol)
{
  if (!std::holds_alternative<ColoredExclusion>(gen.spec().params))
    throw UnsupportedVariantError("H0 decomposition needs a colored exclusion generator");

  const auto proj = occupancy_projection(gen.space());
  const auto& nu = gen.measure();
  const auto n = static_cast<Eigen::Index>(gen.size());
  const auto c = static_cast<Eigen::Index>(proj.classes.size());

  std::vector<double> class_mass(proj.classes.size(), 0.0);
  for (std::size_t k = 0; k < gen.size(); ++k) class_mass[proj.class_of[k]] += nu[k];

  // Pi0 f = nu(f | psi), and its image in sqrt(nu) coordinates.
  Eigen::MatrixXd pi0 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, c);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t cls = proj.class_of[static_cast<std::size_t>(r)];
    u(r, static_cast<Eigen::Index>(cls)) = std::sqrt(nu[static_cast<std::size_t>(r)] / class_mass[cls]);
    for (Eigen::Index col = 0; col < n; ++col)
      if (proj.class_of[static_cast<std::size_t>(col)] == cls)
        pi0(r, col) = nu[static_cast<std::size_t>(col)] / class_mass[cls];
  }

  H0Decomposition out;
  const Eigen::MatrixXd l = gen.matrix().to_dense();
  out.commutator_residual = (l * pi0 - pi0 * l).cwiseAbs().maxCoeff();
  out.commutes = out.commutator_residual <= tol.projection;
  out.h0_dimension = static_cast<std::size_t>(c);
  out.perp_dimension = static_cast<std::size_t>(n - c);

  const Eigen::MatrixXd s = symmetrized_dense(gen);
  if (c >= 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(u.transpose() * s * u, Eigen::EigenvaluesOnly);
    out.gap_h0 = es.eigenvalues()(1);
  }
  if (n > c) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd perp = q.rightCols(n - c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(perp.transpose() * s * perp, Eigen::EigenvaluesOnly);
    out.gap_perp = es.eigenvalues()(0);
  }
  out.combined = std::min(out.gap_h0, out.gap_perp);
  SpectrumOptions dense;
  dense.method = SolverMethod::Dense;
  out.full_gap = spectral_gap(gen, dense).gap;
  out.consistent = out.combined == out.full_gap || std::abs(out.combined - out.full_gap) <= gap_tol;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Omega> default_omegas(const ModelSpec& family)
{
  std::vector<Omega> out;
  if (std::holds_alternative<DisorderedExclusion>(family.params)) {
    for (int k = 0; k <= static_cast<int>(family.n); ++k) out.push_back({k});
  } else if (const auto* m = std::get_if<ColoredExclusion>(&family.params)) {
    const int n = static_cast<int>(family.n);
    const int top = m->gamma == 0 ? (n - 1) / m->colors : n / m->colors;
    for (int k = 0; k <= top; ++k) out.push_back(Omega(static_cast<std::size_t>(m->colors), k));
  } else if (std::holds_alternative<BiasedPermutations>(family.params)) {
    out.push_back(Omega(family.n, 1));
  } else {
    throw UnsupportedVariantError("conservation sweeps need a finite variant");
  }
  return out;
}

ModelSpec spec_with_omega(const ModelSpec& family, const Omega& omega)
{
  switch (family.variant()) {
    case Variant::DisorderedExclusion:
      if (omega.size() != 1) throw ShapeError("exclusion conservation value is a single particle count");
      return with_particles(family, omega[0]);
    case Variant::ColoredExclusion: return with_counts(family, omega);
    case Variant::BiasedPermutations:
      if (!omega.empty() && omega != Omega(family.n, 1))
        throw DomainError("permutations admit only omega = (1,...,1)");
      return family;
    default: throw UnsupportedVariantError("conservation sweeps need a finite variant");
  }
}

GapOverOmega min_gap_over_omega(const ModelSpec& family, std::span<const Omega> omegas,
                                const SpectrumOptions& spectrum, const GeneratorOptions& generator,
                                std::size_t threads)
{
  if (omegas.empty()) throw DomainError("empty conservation range");
  GapOverOmega out;
  out.entries.resize(omegas.size());
  parallel_for(omegas.size(), threads, [&](std::size_t k) {
    const ModelSpec spec = spec_with_omega(family, omegas[k]);
    auto& entry = out.entries[k];
    entry.omega = omegas[k];
    entry.rho = spec.variant() == Variant::BiasedPermutations ? 1.0 : global_density(spec);
    entry.report = spectral_gap(build_generator(spec, generator), spectrum);
  });
  for (const auto& e : out.entries) out.minimum = std::min(out.minimum, e.report.gap);
  return out;
}

}  // namespace cgap

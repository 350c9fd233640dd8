#include "cgap/theorems.hpp"

#include "cgap/continuum.hpp"
#include "cgap/errors.hpp"
#include "cgap/monte_carlo.hpp"
#include "cgap/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cgap {

BoundReport make_report(std::string group, std::string name, std::map<std::string, double> inputs,
                        BoundKind kind, double bound, double measured, double tolerance)
{
  BoundReport r{std::move(group), std::move(name), std::move(inputs), kind, bound, measured};
  r.tolerance = tolerance;
  switch (kind) {
    case BoundKind::Lower: r.margin = measured - bound; break;
    case BoundKind::Upper: r.margin = bound - measured; break;
    case BoundKind::Equal: r.margin = -std::abs(measured - bound); break;
  }
  r.pass = r.margin >= -tolerance;
  return r;
}

BoundReport make_exact_report(std::string group, std::string name, std::map<std::string, double> inputs,
                              const Rational& bound, const Rational& measured)
{
  BoundReport r{std::move(group), std::move(name), std::move(inputs), BoundKind::Equal, to_double(bound),
                to_double(measured)};
  r.tolerance = 0.0;
  r.margin = -std::abs(to_double(measured - bound));
  r.pass = bound == measured;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

void require_sites(std::size_t n, std::size_t min, const char* what)
{
  if (n < min) throw DomainError(std::string(what) + " needs N >= " + std::to_string(min));
}

}  // namespace

double reduction_bound(double lambda3, std::size_t n)
{
  require_sites(n, 2, "reduction bound");
  const double nn = static_cast<double>(n);
  return (3.0 * lambda3 - 1.0) * (1.0 - 2.0 / nn) + 1.0 / nn;
}

Rational reduction_bound(const Rational& lambda3, std::size_t n)
{
  require_sites(n, 2, "reduction bound");
  const Rational inv(1, static_cast<long long>(n));
  return (Rational(3) * lambda3 - Rational(1)) * (Rational(1) - Rational(2) * inv) + inv;
}

double clique4_bound(double lambda4, std::size_t n)
{
  require_sites(n, 4, "clique-4 bound");
  const double nn = static_cast<double>(n);
  return (4.0 * lambda4 - 1.0) * (0.5 - 1.0 / nn) + 1.0 / nn;
}

Rational clique4_bound(const Rational& lambda4, std::size_t n)
{
  require_sites(n, 4, "clique-4 bound");
  const Rational inv(1, static_cast<long long>(n));
  return (Rational(4) * lambda4 - Rational(1)) * (Rational(1, 2) - inv) + inv;
}

double det_p_formula(double x, double y, double z)
{
  return 2.0 / 9.0 * (1.0 + x * y * z / ((1.0 - x) * (1.0 - y) * (1.0 - z)));
}

std::array<double, 3> three_site_weights(double p1, double p2, double p3)
{
  const double a = p1 * (1 - p2) * (1 - p3);
  const double b = (1 - p1) * p2 * (1 - p3);
  const double c = (1 - p1) * (1 - p2) * p3;
  const double z = a + b + c;
  return {a / z, b / z, c / z};
}

std::array<double, 3> p_matrix_eigenvalues(double x, double y, double z)
{
  const Eigen::Matrix3d p = p_matrix_three_site(x, y, z);
  const Eigen::Vector3d s(std::sqrt(x), std::sqrt(y), std::sqrt(z));
  Eigen::Matrix3d sym = s.asDiagonal() * p * s.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sym, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(2), es.eigenvalues()(1), es.eigenvalues()(0)};
}

ModelSpec truncated(const ModelSpec& family, std::size_t n)
{
  if (family.n < n)
    throw DomainError("family has " + std::to_string(family.n) + " sites, cannot restrict to " + std::to_string(n));
  ModelSpec out = family;
  out.n = n;
  if (auto* e = std::get_if<DisorderedExclusion>(&out.params)) {
    e->p.resize(n);
    e->particles = std::min(e->particles, static_cast<int>(n));
  } else if (auto* c = std::get_if<ColoredExclusion>(&out.params)) {
    c->p.resize(n);
    c->counts.assign(c->counts.size(), 0);
  } else if (auto* b = std::get_if<BiasedPermutations>(&out.params)) {
    b->bias.resize(n);
    for (auto& row : b->bias) row.resize(n);
  } else {
    throw UnsupportedVariantError("site restriction needs a finite variant");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Triangle reduction

namespace {

struct Triangle
{
  std::size_t a, b, c;
};

std::vector<Triangle> all_triangles(std::size_t n)
{
  std::vector<Triangle> out;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c) out.push_back({a, b, c});
  return out;
}

/// Smallest nonzero eigenvalue of -L restricted to `members`, in L^2 of nu there.
double local_gap(const SparseMatrix& l, const StationaryMeasure& nu, const std::vector<std::size_t>& members)
{
  const auto m = static_cast<Eigen::Index>(members.size());
  Eigen::MatrixXd s(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto gr = static_cast<Eigen::Index>(members[static_cast<std::size_t>(r)]);
      const auto gc = static_cast<Eigen::Index>(members[static_cast<std::size_t>(c)]);
      s(r, c) = -l.coeff(gr, gc) * std::sqrt(nu[static_cast<std::size_t>(gr)] / nu[static_cast<std::size_t>(gc)]);
    }
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(1);
}

}  // namespace

double triangle_gap_infimum(const CollisionGenerator& gen)
{
  if (!gen.is_average_type())
    throw UnsupportedVariantError("triangle reduction needs a generator of the form (1/N) sum_b D_b");
  const auto& space = gen.space();
  const auto& nu = gen.measure();
  const std::size_t n = space.sites();
  require_sites(n, 3, "triangle reduction");

  std::vector<SparseMatrix> e;
  for (const Pair& b : all_pairs(n)) e.push_back(conditional_expectation_operator(space, nu, b).matrix);
  auto pair_index = [n](std::size_t i, std::size_t j) { return i * n - i * (i + 1) / 2 + (j - i - 1); };

  const auto size = static_cast<Eigen::Index>(space.size());
  SparseMatrix id(size, size);
  id.setIdentity();
  double best = kInfiniteGap;
  for (const Triangle& t : all_triangles(n)) {
    const SparseMatrix local =
        (e[pair_index(t.a, t.b)] + e[pair_index(t.a, t.c)] + e[pair_index(t.b, t.c)] - 3.0 * id) / 3.0;
    std::map<Configuration, std::vector<std::size_t>> classes;
    for (std::size_t k = 0; k < space.size(); ++k) {
      Configuration outside = space[k];
      outside[t.a] = outside[t.b] = outside[t.c] = -1;
      classes[outside].push_back(k);
    }
    for (const auto& [key, members] : classes)
      if (members.size() > 1) best = std::min(best, local_gap(local, nu, members));
  }
  return best;
}

double triangle_identity_residual(const CollisionGenerator& gen, const Eigen::VectorXd& f)
{
  const auto& space = gen.space();
  const auto& nu = gen.measure();
  const std::size_t n = space.sites();
  require_sites(n, 3, "triangle identity");
  const auto pairs = all_pairs(n);
  std::vector<Eigen::VectorXd> d;
  for (const Pair& b : pairs) d.push_back(apply_pair_difference(space, nu, b, f));
  const std::size_t np = pairs.size();
  Eigen::MatrixXd g(np, np);
  for (std::size_t a = 0; a < np; ++a)
    for (std::size_t b = 0; b < np; ++b) {
      double acc = 0.0;
      for (std::size_t k = 0; k < nu.size(); ++k)
        acc += nu[k] * d[a](static_cast<Eigen::Index>(k)) * d[b](static_cast<Eigen::Index>(k));
      g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
    }

  double lhs = 0.0;
  for (std::size_t a = 0; a < np; ++a)
    for (std::size_t b = 0; b < np; ++b)
      if (!pairs_disjoint(pairs[a], pairs[b])) lhs += g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));

  auto index_of = [&](std::size_t i, std::size_t j) {
    return static_cast<Eigen::Index>(std::find(pairs.begin(), pairs.end(), Pair::make(i, j)) - pairs.begin());
  };
  double rhs = 0.0;
  for (const Triangle& t : all_triangles(n)) {
    const std::array<Eigen::Index, 3> in = {index_of(t.a, t.b), index_of(t.a, t.c), index_of(t.b, t.c)};
    for (auto a : in)
      for (auto b : in) rhs += g(a, b);
  }
  const double diag = g.diagonal().sum();
  rhs -= (static_cast<double>(n) - 3.0) * diag;
  return std::abs(lhs - rhs) / std::max(1.0, diag);
}

std::vector<BoundReport> verify_reduction_theorem(const ModelSpec& family, const ReductionOptions& options)
{
  if (!family.is_finite()) throw UnsupportedVariantError("reduction check needs a finite variant");
  if (const auto* c = std::get_if<ColoredExclusion>(&family.params); c && c->gamma == 0 && c->colors > 1)
    throw UnsupportedVariantError("reduction check needs gamma = 1 for colored exclusion");
  if (options.n_min < 2 || options.n_max < options.n_min) throw DomainError("need 2 <= n_min <= n_max");
  if (family.n < options.n_max)
    throw DomainError("family has " + std::to_string(family.n) + " sites but n_max is " +
                      std::to_string(options.n_max));

  const std::string group = "reduction";
  const std::string variant(variant_name(family.variant()));
  std::vector<BoundReport> out;

  const ModelSpec top = truncated(family, options.n_max);
  double lambda3 = kInfiniteGap;
  if (options.lambda3) {
    lambda3 = *options.lambda3;
  } else {
    if (options.n_max < 3) throw DomainError("bar-lambda(3) needs n_max >= 3");
    for (const Omega& w : default_omegas(top)) {
      const auto gen = build_generator(spec_with_omega(top, w));
      if (!gen.is_degenerate()) lambda3 = std::min(lambda3, triangle_gap_infimum(gen));
    }
  }
  {
    BoundReport info = make_report(group, "bar-lambda(3) " + variant, {{"n_max", double(options.n_max)}},
                                   BoundKind::Lower, 0.0, lambda3, options.tol);
    info.asserted = false;
    out.push_back(info);
  }

  for (std::size_t n = options.n_min; n <= options.n_max; ++n) {
    const ModelSpec fam = truncated(family, n);
    const double bound = reduction_bound(lambda3, n);
    for (const Omega& w : default_omegas(fam)) {
      const auto gen = build_generator(spec_with_omega(fam, w));
      if (gen.is_degenerate()) continue;
      const double gap = spectral_gap(gen, options.spectrum).gap;
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      out.push_back(make_report(group, "lambda(N,omega) >= reduction bound " + variant,
                                {{"N", double(n)}, {"omega", total}, {"lambda3", lambda3}}, BoundKind::Lower, bound,
                                gap, options.tol));
    }
  }

  if (options.n_max >= 3) {
    const auto omegas = default_omegas(top);
    for (std::size_t k = 0; k < omegas.size(); ++k) {
      const Omega& w = omegas[(omegas.size() / 2 + k) % omegas.size()];
      const auto gen = build_generator(spec_with_omega(top, w));
      if (gen.is_degenerate()) continue;
      const auto f = random_functions(gen.size(), 1, options.seed).front();
      out.push_back(make_report(group, "triangle decomposition identity " + variant,
                                {{"N", double(options.n_max)}}, BoundKind::Equal, 0.0,
                                triangle_identity_residual(gen, f), options.identity_tol));
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<BoundReport> verify_exclusion_three_site(double p1, double p2, double p3, double tol)
{
  const std::string group = "three-site";
  const std::map<std::string, double> in = {{"p1", p1}, {"p2", p2}, {"p3", p3}};
  std::vector<BoundReport> out;

  const double gap = spectral_gap(build_generator(ModelSpec::exclusion({p1, p2, p3}, 1))).gap;
  const auto [x, y, z] = three_site_weights(p1, p2, p3);
  const Eigen::Matrix3d p = p_matrix_three_site(x, y, z);
  const auto ev = p_matrix_eigenvalues(x, y, z);
  const double gap_p = std::min(1.0 - ev[1], 1.0 - ev[2]);

  out.push_back(make_report(group, "eigensolve gap = min(1-l1, 1-l2) of P", in, BoundKind::Equal, gap_p, gap, tol));
  out.push_back(make_report(group, "trace(P) = 2", in, BoundKind::Equal, 2.0, p.trace(), 1e-12));
  out.push_back(make_report(group, "det(P) = (2/9)(1 + xyz/((1-x)(1-y)(1-z)))", in, BoundKind::Equal,
                            det_p_formula(x, y, z), p.determinant(), 1e-12));
  out.push_back(make_report(group, "|l_i - 1/2| < 1/6", in, BoundKind::Upper, 1.0 / 6.0,
                            std::max(std::abs(ev[1] - 0.5), std::abs(ev[2] - 0.5)), 0.0));
  out.push_back(make_report(group, "gap > 1/3", in, BoundKind::Lower, 1.0 / 3.0, gap, 0.0));

  // One hole: the empty site moves like a particle for the densities 1 - p.
  const double gap2 = spectral_gap(build_generator(ModelSpec::exclusion({p1, p2, p3}, 2))).gap;
  const auto [hx, hy, hz] = three_site_weights(1 - p1, 1 - p2, 1 - p3);
  const auto hev = p_matrix_eigenvalues(hx, hy, hz);
  out.push_back(make_report(group, "two-particle gap = hole P gap", in, BoundKind::Equal,
                            std::min(1.0 - hev[1], 1.0 - hev[2]), gap2, tol));
  out.push_back(make_report(group, "two-particle gap > 1/3", in, BoundKind::Lower, 1.0 / 3.0, gap2, 0.0));
  return out;
}

// ---------------------------------------------------------------------------

std::vector<BoundReport> verify_colored_bounds(std::span<const double> p, std::size_t colors,
                                               std::span<const Omega> sweep, const ColoredOptions& options)
{
  const std::string group = "colored";
  const std::size_t n = p.size();
  const std::vector<double> pv(p.begin(), p.end());
  std::vector<BoundReport> out;
  std::vector<double> gaps1, ratios0;
  double upper_const = 0.0;

  for (const Omega& w : sweep) {
    const int total = std::accumulate(w.begin(), w.end(), 0);
    if (total <= 0 || total >= static_cast<int>(n)) continue;
    const double rho = static_cast<double>(total) / static_cast<double>(n);
    const std::map<std::string, double> in = {{"N", double(n)}, {"m", double(colors)}, {"rho", rho}};

    const auto gen1 = build_colored_generator(ModelSpec::colored(pv, static_cast<int>(colors), 1, w), 1);
    const double g1 = spectral_gap(gen1, options.spectrum).gap;
    gaps1.push_back(g1);
    out.push_back(make_report(group, "detailed balance gamma=1", in, BoundKind::Upper, options.detailed_balance_tol,
                              diagnose(gen1).max_detailed_balance, 0.0));
    {
      const auto avg = build_average_generator(gen1.space(), gen1.measure());
      const double diff = (gen1.matrix().to_dense() - avg.matrix().to_dense()).cwiseAbs().maxCoeff();
      out.push_back(make_report(group, "gamma=1 rates = average generator", in, BoundKind::Upper,
                                options.construction_tol, diff, 0.0));
    }
    const auto h1 = h0_decomposition(gen1, {}, options.h0_tol);
    out.push_back(make_report(group, "min(lambda0, lambda_perp) = gap gamma=1", in, BoundKind::Equal, h1.full_gap,
                              h1.combined, options.h0_tol));

    const ModelSpec spec0 = ModelSpec::colored(pv, static_cast<int>(colors), 0, w);
    std::optional<CollisionGenerator> gen0;
    try {
      gen0.emplace(build_colored_generator(spec0, 0));
    } catch (const ReducibleError& e) {
      BoundReport skip = make_report(group, "gamma=0 reducible, skipped", in, BoundKind::Equal, 0.0,
                                     double(e.components()), 0.0);
      skip.asserted = false;
      out.push_back(skip);
      continue;
    }
    const double g0 = spectral_gap(*gen0, options.spectrum).gap;
    out.push_back(make_report(group, "detailed balance gamma=0", in, BoundKind::Upper, options.detailed_balance_tol,
                              diagnose(*gen0).max_detailed_balance, 0.0));
    const auto h0 = h0_decomposition(*gen0, {}, options.h0_tol);
    out.push_back(make_report(group, "min(lambda0, lambda_perp) = gap gamma=0", in, BoundKind::Equal, h0.full_gap,
                              h0.combined, options.h0_tol));

    if (colors == 1) {
      out.push_back(make_report(group, "m=1: gamma=0 gap = gamma=1 gap", in, BoundKind::Equal, g1, g0, options.tol));
      continue;
    }

    // Indicator of color 1 at a site: its Rayleigh quotient bounds the gap from above.
    double rayleigh = kInfiniteGap;
    const auto& space = gen0->space();
    for (std::size_t site = 0; site < n; ++site) {
      Eigen::VectorXd f(static_cast<Eigen::Index>(space.size()));
      for (std::size_t k = 0; k < space.size(); ++k) f(static_cast<Eigen::Index>(k)) = space[k][site] == 1 ? 1.0 : 0.0;
      const double var = gen0->measure().variance(std::span<const double>(f.data(), space.size()));
      if (var > 1e-300) rayleigh = std::min(rayleigh, dirichlet_form(*gen0, f).value / var);
    }
    out.push_back(make_report(group, "gamma=0 gap <= indicator Rayleigh quotient", in, BoundKind::Upper, rayleigh, g0,
                              options.tol));
    ratios0.push_back(g0 / (1.0 - rho));
    upper_const = std::max(upper_const, rayleigh / (1.0 - rho));
  }

  const std::map<std::string, double> in = {{"N", double(n)}, {"m", double(colors)}};
  if (gaps1.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(gaps1.begin(), gaps1.end());
    out.push_back(make_report(group, "gamma=1 gap spread over sweep", in, BoundKind::Upper, options.gamma1_spread,
                              *hi / *lo, 0.0));
  }
  if (!ratios0.empty()) {
    const auto [lo, hi] = std::minmax_element(ratios0.begin(), ratios0.end());
    if (ratios0.size() >= 2)
      out.push_back(make_report(group, "gamma=0 g/(1-rho) spread over sweep", in, BoundKind::Upper,
                                options.gamma0_spread, *hi / *lo, 0.0));
    BoundReport c_low = make_report(group, "empirical c: min g/(1-rho)", in, BoundKind::Lower, 0.0, *lo, 0.0);
    c_low.asserted = false;
    out.push_back(c_low);
    BoundReport c_high = make_report(group, "empirical C: max Rayleigh/(1-rho)", in, BoundKind::Lower, 0.0,
                                     upper_const, 0.0);
    c_high.asserted = false;
    out.push_back(c_high);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<BoundReport> density_ratio_comparison(const CollisionGenerator& gen, const CollisionGenerator& gen0,
                                                  std::span<const Eigen::VectorXd> samples, double tol)
{
  if (gen.size() != gen0.size() || gen.space().states() != gen0.space().states())
    throw ShapeError("density comparison needs the same state space");
  const auto& nu = gen.measure();
  const auto& nu0 = gen0.measure();
  double m = 1.0;
  for (std::size_t k = 0; k < nu.size(); ++k) m = std::max({m, nu[k] / nu0[k], nu0[k] / nu[k]});

  const std::string group = "density-ratio";
  const std::map<std::string, double> in = {{"M", m}, {"N", double(gen.space().sites())}};
  double var_ratio = 0.0, form_ratio = 0.0;
  for (const auto& f : samples) {
    const std::span<const double> fs(f.data(), static_cast<std::size_t>(f.size()));
    const double v = nu.variance(fs), v0 = nu0.variance(fs);
    const double e = dirichlet_form(gen, f).value, e0 = dirichlet_form(gen0, f).value;
    if (v > 1e-300 && v0 > 1e-300) var_ratio = std::max({var_ratio, v / v0, v0 / v});
    if (e > 1e-300 && e0 > 1e-300) form_ratio = std::max({form_ratio, e / e0, e0 / e});
  }
  std::vector<BoundReport> out;
  out.push_back(make_report(group, "variance ratio <= M", in, BoundKind::Upper, m, var_ratio, tol));
  out.push_back(make_report(group, "Dirichlet form ratio <= M^3", in, BoundKind::Upper, m * m * m, form_ratio, tol));
  const double g = spectral_gap(gen).gap, g0 = spectral_gap(gen0).gap;
  const double m4 = m * m * m * m;
  out.push_back(make_report(group, "gap >= gap0 / M^4", in, BoundKind::Lower, g0 / m4, g, tol));
  out.push_back(make_report(group, "gap <= gap0 * M^4", in, BoundKind::Upper, g0 * m4, g, tol));
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> random_densities(std::size_t n, double eps, std::uint64_t seed)
{
  if (!(eps >= 0.0 && eps < 0.5)) throw DomainError("eps must lie in [0, 1/2)");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(eps, 1.0 - eps);
  std::vector<double> p(n);
  for (double& x : p) x = std::clamp(u(rng), std::max(eps, 1e-12), std::min(1.0 - eps, 1.0 - 1e-12));
  return p;
}

std::vector<BoundReport> property_checks(const ModelSpec& spec, std::uint64_t seed, std::size_t samples,
                                         const Tolerances& tol)
{
  const std::string group = "properties";
  const std::string tag = " (" + std::string(variant_name(spec.variant())) + ")";
  const auto gen = build_generator(spec);
  const auto& space = gen.space();
  const auto& nu = gen.measure();
  const std::map<std::string, double> in = {{"N", double(spec.n)}, {"states", double(space.size())}};
  std::vector<BoundReport> out;

  const auto diag = diagnose(gen);
  out.push_back(make_report(group, "row sums" + tag, in, BoundKind::Upper, tol.row_sum, diag.max_row_sum, 0.0));
  out.push_back(make_report(group, "detailed balance" + tag, in, BoundKind::Upper, tol.detailed_balance,
                            diag.max_detailed_balance, 0.0));

  const auto pairs = all_pairs(spec.n);
  std::vector<SparseMatrix> e;
  for (const Pair& b : pairs) e.push_back(conditional_expectation_operator(space, nu, b).matrix);
  const auto size = static_cast<Eigen::Index>(space.size());
  SparseMatrix id(size, size);
  id.setIdentity();
  auto max_abs = [](const SparseMatrix& m) {
    double r = 0.0;
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
    return r;
  };
  double projection = 0.0, commutator = 0.0;
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    const SparseMatrix d = e[a] - id;
    projection = std::max(projection, max_abs(SparseMatrix(SparseMatrix(d * d) + d)));
    for (std::size_t b = a + 1; b < pairs.size(); ++b)
      if (pairs_disjoint(pairs[a], pairs[b]))
        commutator = std::max(commutator, max_abs(SparseMatrix(SparseMatrix(e[a] * e[b]) - SparseMatrix(e[b] * e[a]))));
  }
  out.push_back(make_report(group, "D_b^2 = -D_b" + tag, in, BoundKind::Upper, tol.projection, projection, 0.0));
  if (spec.n >= 4)
    out.push_back(make_report(group, "E_b E_b' = E_b' E_b for disjoint pairs" + tag, in, BoundKind::Upper,
                              tol.projection, commutator, 0.0));

  // Non-interference: conditioning nu outside A gives the conditioned product law on A.
  std::mt19937_64 rng(seed);
  double law_diff = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::size_t> sites(spec.n);
    std::iota(sites.begin(), sites.end(), 0);
    std::shuffle(sites.begin(), sites.end(), rng);
    sites.resize(std::min<std::size_t>(spec.n, 2 + static_cast<std::size_t>(trial % 2)));
    std::sort(sites.begin(), sites.end());
    const Configuration& eta = space[std::uniform_int_distribution<std::size_t>(0, space.size() - 1)(rng)];
    const auto local = conditioned_local_law(spec, eta, sites);
    double z = 0.0;
    std::vector<std::pair<std::size_t, double>> matches;
    for (std::size_t k = 0; k < space.size(); ++k) {
      bool agrees = true;
      for (std::size_t i = 0; i < spec.n && agrees; ++i)
        if (std::find(sites.begin(), sites.end(), i) == sites.end()) agrees = space[k][i] == eta[i];
      if (agrees) {
        matches.emplace_back(k, nu[k]);
        z += nu[k];
      }
    }
    if (matches.size() != local.size()) {
      law_diff = 1.0;
      continue;
    }
    for (std::size_t q = 0; q < matches.size(); ++q) {
      if (space[matches[q].first] != local[q].first) law_diff = std::max(law_diff, 1.0);
      law_diff = std::max(law_diff, std::abs(matches[q].second / z - local[q].second));
    }
  }
  out.push_back(make_report(group, "non-interference of conditioned laws" + tag, in, BoundKind::Upper,
                            tol.projection, law_diff, 0.0));

  const auto spectrum = spectral_gap(gen);
  if (!spectrum.infinite()) {
    const auto fs = random_functions(space.size(), samples, seed ^ 0x5eedULL);
    const auto var = variational_check(gen, spectrum.gap, fs);
    out.push_back(make_report(group, "nu((Lf)^2) >= gap nu(f(-L)f)" + tag, in, BoundKind::Lower, 0.0,
                              var.worst_equi_margin, var.tolerance));
    out.push_back(make_report(group, "Rayleigh quotient >= gap" + tag, in, BoundKind::Lower, 0.0,
                              var.worst_rayleigh_margin, var.tolerance));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Suite

namespace {

/// Keeps the worst case of each check name, in first-appearance order.
std::vector<BoundReport> collapse(const std::vector<BoundReport>& reports)
{
  std::vector<BoundReport> out;
  std::map<std::string, std::size_t> where;
  std::map<std::string, std::size_t> count;
  for (const auto& r : reports) {
    ++count[r.name];
    auto it = where.find(r.name);
    if (it == where.end()) {
      where[r.name] = out.size();
      out.push_back(r);
    } else if (r.margin < out[it->second].margin) {
      out[it->second] = r;
    }
  }
  for (auto& r : out) r.inputs["cases"] = double(count[r.name]);
  return out;
}

void append(std::vector<BoundReport>& dst, const std::vector<BoundReport>& src)
{
  dst.insert(dst.end(), src.begin(), src.end());
}

std::vector<BoundReport> group_kac(std::uint64_t seed, double tol)
{
  std::vector<BoundReport> out;
  const auto rule = QuadratureRule::uniform_angle(64);
  const auto f = power_sum(4);
  for (std::size_t n = 3; n <= 6; ++n) {
    std::vector<double> slopes;
    for (double omega : {1.0, 4.0}) {
      const auto pts = random_sphere_points(n, omega, 1000, split_seed(seed, n * 10 + std::size_t(omega)));
      const auto fit = eigenfunction_fit_kac(f, pts, rule);
      const double nn = double(n);
      const std::map<std::string, double> in = {{"N", nn}, {"omega", omega}};
      out.push_back(make_report("kac", "slope of L f_N = -(N+2)/(4N)", in, BoundKind::Equal, -(nn + 2) / (4 * nn),
                                fit.slope, tol));
      out.push_back(make_report("kac", "intercept of L f_N = 3 omega^2/(4N)", in, BoundKind::Equal,
                                3 * omega * omega / (4 * nn), fit.intercept, tol));
      out.push_back(make_report("kac", "max residual of affine fit", in, BoundKind::Upper, tol, fit.max_residual, 0.0));
      slopes.push_back(fit.slope);
    }
    out.push_back(make_report("kac", "slope independent of the radius", {{"N", double(n)}}, BoundKind::Equal,
                              slopes[0], slopes[1], 1e-10));
  }
  return out;
}

std::vector<BoundReport> group_flat(std::uint64_t seed, double tol)
{
  std::vector<BoundReport> out;
  const auto rule = QuadratureRule::interval_gauss(16);
  const auto f = power_sum(2);
  for (double omega : {1.0, 2.0}) {
    const auto pts = random_simplex_points(3, omega, 1000, split_seed(seed, std::size_t(omega)));
    const auto fit = eigenfunction_fit_flat(f, pts, rule);
    const std::map<std::string, double> in = {{"N", 3.0}, {"omega", omega}};
    out.push_back(make_report("flat-kac", "slope of L f_3 = -4/9", in, BoundKind::Equal, -4.0 / 9.0, fit.slope, tol));
    out.push_back(make_report("flat-kac", "intercept of L f_3 = (2/9) omega^2", in, BoundKind::Equal,
                              2.0 / 9.0 * omega * omega, fit.intercept, tol));
    out.push_back(make_report("flat-kac", "max residual of affine fit", in, BoundKind::Upper, tol, fit.max_residual, 0.0));
  }

  const auto k = k_operator_matrix(8);
  const auto ev = k.eigenvalues();
  for (std::size_t n = 0; n <= 8; ++n)
    out.push_back(make_report("flat-kac", "K eigenvalue (-1)^n/(n+1)", {{"n", double(n)}}, BoundKind::Equal,
                              to_double(k_operator_eigenvalue(n)), ev[n], 1e-10));
  {
    Eigen::VectorXd phi1 = Eigen::VectorXd::Zero(9);
    phi1(0) = -1.0 / 3.0;
    phi1(1) = 1.0;
    const double err = (k.apply(phi1) + 0.5 * phi1).cwiseAbs().maxCoeff();
    out.push_back(make_report("flat-kac", "K(a - 1/3) = -(1/2)(a - 1/3)", {}, BoundKind::Equal, 0.0, err, 1e-12));
  }
  out.push_back(make_exact_report("flat-kac", "gap3 bound from (mu1, mu2) = (-1/2, 1/3) is 4/9", {}, Rational(4, 9),
                                  gap3_bound_from_mu(Rational(-1, 2), Rational(1, 3))));
  const auto gauss = QuadratureRule::interval_gauss(16);
  for (double e2 : {0.0, 0.25, 0.5, 0.75, 1.0})
    out.push_back(make_report("flat-kac", "nu[eta_1^2 | eta_2] formula = quadrature", {{"eta2", e2}}, BoundKind::Equal,
                              conditional_second_moment_flat_quadrature(e2, gauss),
                              conditional_second_moment_flat(e2), 1e-12));
  int mismatches = 0;
  for (std::size_t n = 2; n <= 100; ++n)
    if (reduction_bound(Rational(4, 9), n) != Rational(static_cast<long long>(n + 1), static_cast<long long>(3 * n)))
      ++mismatches;
  out.push_back(make_exact_report("flat-kac", "reduction_bound(4/9, N) = (N+1)/(3N), N = 2..100", {}, Rational(0),
                                  Rational(mismatches)));
  return out;
}

std::vector<BoundReport> group_transpositions(double tol)
{
  std::vector<BoundReport> out;
  for (std::size_t n = 3; n <= 5; ++n) {
    const auto rep = spectral_gap(build_generator(ModelSpec::uniform_permutations(n)));
    out.push_back(make_report("transpositions", "uniform transposition gap = 1/2",
                              {{"N", double(n)}, {"states", double(rep.states)}}, BoundKind::Equal, 0.5, rep.gap, tol));
  }
  return out;
}

std::vector<BoundReport> group_det_p(std::uint64_t seed)
{
  std::vector<BoundReport> raw;
  for (const auto& pt : random_simplex_points(3, 1.0, 100, seed)) {
    const double x = pt.eta[0], y = pt.eta[1], z = pt.eta[2];
    const std::map<std::string, double> in = {{"x", x}, {"y", y}, {"z", z}};
    const double formula = det_p_formula(x, y, z);
    raw.push_back(make_report("det-p", "det(P) = (2/9)(1 + xyz/((1-x)(1-y)(1-z)))", in, BoundKind::Equal, formula,
                              p_matrix_three_site(x, y, z).determinant(), 1e-12));
    raw.push_back(make_report("det-p", "det(P) > 2/9", in, BoundKind::Lower, 2.0 / 9.0, formula, 0.0));
  }
  auto out = collapse(raw);
  out.push_back(make_report("det-p", "det(P) at x = y = z = 1/3 is 1/4", {}, BoundKind::Equal, 0.25,
                            p_matrix_three_site(1.0 / 3, 1.0 / 3, 1.0 / 3).determinant(), 1e-12));
  return out;
}

std::vector<BoundReport> group_three_site(std::uint64_t seed)
{
  std::vector<BoundReport> raw;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 100; ++k) {
    const auto p = random_densities(3, 0.1, rng());
    append(raw, verify_exclusion_three_site(p[0], p[1], p[2]));
  }
  auto out = collapse(raw);
  for (const auto& r : verify_exclusion_three_site(0.5, 0.5, 0.5))
    if (r.name.starts_with("eigensolve")) {
      auto u = make_report("three-site", "uniform densities: gap = 1/2", r.inputs, BoundKind::Equal, 0.5, r.measured,
                           1e-10);
      out.push_back(u);
    }
  return out;
}

std::vector<BoundReport> group_reduction(std::uint64_t seed, double tol, std::optional<double> lambda3)
{
  std::vector<BoundReport> raw;
  ReductionOptions opt;
  opt.tol = tol;
  opt.lambda3 = lambda3;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 50; ++k) {
    opt.seed = rng();
    append(raw, verify_reduction_theorem(ModelSpec::exclusion(random_densities(6, 0.1, rng()), 0), opt));
  }
  opt.n_max = 5;
  append(raw, verify_reduction_theorem(ModelSpec::uniform_permutations(5), opt));
  opt.n_max = 6;
  for (int k = 0; k < 5; ++k) {
    opt.seed = rng();
    append(raw, verify_reduction_theorem(ModelSpec::colored(random_densities(6, 0.1, rng()), 2, 1, {0, 0}), opt));
  }
  auto out = collapse(raw);

  for (std::size_t n = 4; n <= 5; ++n) {
    const double gap = spectral_gap(build_generator(ModelSpec::uniform_permutations(n))).gap;
    out.push_back(make_report("reduction", "uniform permutations: gap = reduction_bound(1/2, N)", {{"N", double(n)}},
                              BoundKind::Equal, reduction_bound(0.5, n), gap, tol));
  }
  int mismatches = 0;
  for (std::size_t n = 2; n <= 100; ++n)
    if (reduction_bound(Rational(5, 12), n) != Rational(static_cast<long long>(n + 2), static_cast<long long>(4 * n)))
      ++mismatches;
  out.push_back(make_exact_report("reduction", "reduction_bound(5/12, N) = (N+2)/(4N), N = 2..100", {}, Rational(0),
                                  Rational(mismatches)));
  std::vector<BoundReport> two;
  for (int k = 0; k < 20; ++k) {
    const auto p = random_densities(2, 0.01, rng());
    two.push_back(make_report("reduction", "two-site disordered gap = 1/2", {{"p1", p[0]}, {"p2", p[1]}},
                              BoundKind::Equal, 0.5, spectral_gap(build_generator(ModelSpec::exclusion(p, 1))).gap,
                              tol));
  }
  append(out, collapse(two));
  return out;
}

std::vector<BoundReport> group_clique4()
{
  std::vector<BoundReport> out;
  int mismatches = 0;
  for (std::size_t n = 4; n <= 100; ++n)
    if (clique4_bound(Rational(1, 3), n) != Rational(1, 6) + Rational(2, static_cast<long long>(3 * n))) ++mismatches;
  out.push_back(make_exact_report("clique4", "clique4_bound(1/3, N) = 1/6 + 2/(3N), N = 4..100", {}, Rational(0),
                                  Rational(mismatches)));
  mismatches = 0;
  for (std::size_t n = 4; n <= 100; ++n)
    if (clique4_bound(Rational(1, 4), n) != Rational(1, static_cast<long long>(n))) ++mismatches;
  out.push_back(make_exact_report("clique4", "clique4_bound(1/4, N) = 1/N, N = 4..100", {}, Rational(0),
                                  Rational(mismatches)));
  for (const Rational l4 : {Rational(1, 3), Rational(1, 2), Rational(2, 7)})
    out.push_back(make_exact_report("clique4", "clique4_bound(l4, 4) = l4", {{"lambda4", to_double(l4)}}, l4,
                                    clique4_bound(l4, 4)));
  return out;
}

std::vector<BoundReport> group_colored(std::uint64_t seed, double tol)
{
  ColoredOptions opt;
  opt.tol = tol;
  std::vector<Omega> sweep = {{1, 1}, {2, 2}, {3, 3}};
  auto out = verify_colored_bounds(random_densities(8, 0.1, seed), 2, sweep, opt);
  std::vector<Omega> single = {{1}, {2}, {3}, {4}};
  append(out, verify_colored_bounds(random_densities(5, 0.1, split_seed(seed, 1)), 1, single, opt));
  return out;
}

std::vector<BoundReport> group_density(std::uint64_t seed, double tol)
{
  std::vector<BoundReport> out;
  for (std::size_t n : {3u, 4u}) {
    std::mt19937_64 rng(split_seed(seed, n));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> base(n, std::vector<double>(n));
    for (auto& row : base)
      for (double& v : row) v = u(rng);
    const auto gen0 = build_generator(ModelSpec::uniform_permutations(n));
    const auto fs = random_functions(gen0.size(), 100, rng());
    for (double b : {0.2, 0.1, 0.05, 0.01, 0.0}) {
      auto bias = base;
      for (auto& row : bias)
        for (double& v : row) v *= b;
      const auto gen = build_generator(ModelSpec::permutations(bias));
      auto reps = density_ratio_comparison(gen, gen0, fs, tol);
      for (auto& r : reps) r.inputs["B"] = b;
      append(out, reps);
      const double gap = spectral_gap(gen).gap;
      BoundReport obs = make_report("density-ratio", "|gap - 1/2| <= 1 - exp(-16B) (observed)",
                                    {{"N", double(n)}, {"B", b}}, BoundKind::Upper, 1.0 - std::exp(-16.0 * b),
                                    std::abs(gap - 0.5), tol);
      obs.asserted = false;
      out.push_back(obs);
      if (b == 0.0)
        out.push_back(make_report("density-ratio", "B = 0: gap = 1/2", {{"N", double(n)}}, BoundKind::Equal, 0.5, gap,
                                  tol));
    }
  }
  return out;
}

ModelSpec random_instance(std::size_t k, std::mt19937_64& rng)
{
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  switch (k % 4) {
    case 0: {
      const auto n = static_cast<std::size_t>(pick(3, 6));
      return ModelSpec::exclusion(random_densities(n, 0.1, rng()), pick(1, int(n) - 1));
    }
    case 1:
    case 2: {
      const auto n = static_cast<std::size_t>(pick(3, 6));
      const int m = pick(1, 3);
      const int gamma = k % 4 == 1 ? 1 : 0;
      std::vector<int> counts(static_cast<std::size_t>(m), 0);
      const int total = pick(1, int(n) - 1);
      for (int t = 0; t < total; ++t) ++counts[static_cast<std::size_t>(pick(0, m - 1))];
      return ModelSpec::colored(random_densities(n, 0.1, rng()), m, gamma, counts);
    }
    default: {
      const auto n = static_cast<std::size_t>(pick(3, 5));
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      std::vector<std::vector<double>> bias(n, std::vector<double>(n));
      for (auto& row : bias)
        for (double& v : row) v = u(rng);
      return ModelSpec::permutations(bias);
    }
  }
}

std::vector<BoundReport> group_properties(std::uint64_t seed)
{
  std::vector<BoundReport> raw;
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < 20; ++k) {
    const ModelSpec spec = random_instance(k, rng);
    append(raw, property_checks(spec, rng()));
  }
  return collapse(raw);
}

std::vector<BoundReport> group_spec(const ModelSpec& spec, std::uint64_t seed, double tol)
{
  std::vector<BoundReport> out;
  const double nn = double(spec.n);
  if (const auto* k = std::get_if<KacSphere>(&spec.params)) {
    const auto pts = random_sphere_points(spec.n, k->radius_sq, 1000, seed);
    const auto fit = eigenfunction_fit_kac(power_sum(4), pts, QuadratureRule::uniform_angle(64));
    out.push_back(make_report("spec", "slope of L f_N = -(N+2)/(4N)", {{"N", nn}, {"omega", k->radius_sq}},
                              BoundKind::Equal, -(nn + 2) / (4 * nn), fit.slope, tol));
    return out;
  }
  if (const auto* f = std::get_if<FlatKac>(&spec.params)) {
    const auto pts = random_simplex_points(spec.n, f->mass, 1000, seed);
    const auto fit = eigenfunction_fit_flat(power_sum(2), pts, QuadratureRule::interval_gauss(16));
    out.push_back(make_report("spec", "slope of L sum eta_i^2 = -(N+1)/(3N)", {{"N", nn}, {"omega", f->mass}},
                              BoundKind::Equal, -(nn + 1) / (3 * nn), fit.slope, tol));
    return out;
  }
  append(out, property_checks(spec, seed));
  for (auto& r : out) r.group = "spec";
  const auto* colored = std::get_if<ColoredExclusion>(&spec.params);
  if (colored && colored->gamma == 0 && colored->colors > 1) {
    ColoredOptions opt;
    opt.tol = tol;
    auto reps = verify_colored_bounds(colored->p, static_cast<std::size_t>(colored->colors), default_omegas(spec), opt);
    for (auto& r : reps) r.group = "spec";
    append(out, reps);
  } else if (spec.n >= 3) {
    ReductionOptions opt;
    opt.tol = tol;
    opt.seed = seed;
    opt.n_min = opt.n_max = spec.n;
    auto reps = verify_reduction_theorem(spec, opt);
    for (auto& r : reps) r.group = "spec";
    append(out, reps);
  }
  return out;
}

}  // namespace

SuiteReport run_verification_suite(const SuiteOptions& options)
{
  const auto& all = suite_groups();
  for (const auto& name : options.only)
    if (std::find(all.begin(), all.end(), name) == all.end()) throw DomainError("unknown verification group: " + name);
  if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), "spec") != options.only.end() &&
      !options.spec)
    throw DomainError("the spec group needs a model spec");

  SuiteReport report;
  for (const auto& name : all) {
    const bool wanted = options.only.empty()
                            ? (name != "spec" || options.spec.has_value())
                            : std::find(options.only.begin(), options.only.end(), name) != options.only.end();
    if (wanted) report.groups.push_back(name);
  }

  std::vector<std::vector<BoundReport>> slots(report.groups.size());
  parallel_for(report.groups.size(), options.threads, [&](std::size_t k) {
    const std::string& g = report.groups[k];
    const auto position = static_cast<std::uint64_t>(std::find(all.begin(), all.end(), g) - all.begin());
    const std::uint64_t seed = split_seed(options.seed, position);
    if (g == "kac") slots[k] = group_kac(seed, options.tol);
    else if (g == "flat-kac") slots[k] = group_flat(seed, options.tol);
    else if (g == "transpositions") slots[k] = group_transpositions(options.tol);
    else if (g == "det-p") slots[k] = group_det_p(seed);
    else if (g == "three-site") slots[k] = group_three_site(seed);
    else if (g == "reduction") slots[k] = group_reduction(seed, options.tol, options.lambda3);
    else if (g == "clique4") slots[k] = group_clique4();
    else if (g == "colored") slots[k] = group_colored(seed, options.tol);
    else if (g == "density-ratio") slots[k] = group_density(seed, options.tol);
    else if (g == "properties") slots[k] = group_properties(seed);
    else if (g == "spec") slots[k] = group_spec(*options.spec, seed, options.tol);
  });
  for (auto& s : slots) append(report.checks, s);
  for (const auto& r : report.checks)
    if (r.asserted && !r.pass) ++report.failures;
  return report;
}

}  // namespace cgap

// collision_gap: spectral gaps, conservation sweeps, Monte Carlo relaxation rates and
// the bound verification suite for binary-collision generators.

#include "cgap/errors.hpp"
#include "cgap/model_io.hpp"
#include "cgap/monte_carlo.hpp"
#include "cgap/report_io.hpp"
#include "cgap/spectra.hpp"
#include "cgap/theorems.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kModelError = 2;
constexpr int kEstimationError = 3;
constexpr int kUsage = 64;

struct RunConfig
{
  std::string spec_path;
  std::string out_path;
  std::string format;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::optional<double> tol;
  std::vector<std::string> only;
  std::vector<std::string> omegas;
  std::optional<double> lambda3;
  std::size_t events = 1000000;
  std::size_t chains = 8;
  double dt = 0.5;
  double lag_min = 0.5;
  double lag_max = 3.0;
  int power = 0;
  std::size_t max_permutation_n = 8;
};

std::size_t default_threads()
{
  if (const char* env = std::getenv("COLLISION_GAP_THREADS")) {
    std::size_t v = 0;
    const std::string s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  return 1;
}

// Console form: 12 significant digits; reports keep full precision.
std::string console_number(double x)
{
  if (x == cgap::kInfiniteGap) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void emit(const RunConfig& cfg, const std::string& text)
{
  if (cfg.out_path.empty()) return;
  std::ofstream os(cfg.out_path, std::ios::binary);
  if (!os) throw cgap::Error("cannot open output file " + cfg.out_path);
  os << text;
}

cgap::GeneratorOptions generator_options(const RunConfig& cfg)
{
  cgap::GeneratorOptions g;
  g.threads = cfg.threads;
  g.enumeration.max_permutation_n = cfg.max_permutation_n;
  return g;
}

cgap::Omega parse_omega(const std::string& text)
{
  cgap::Omega w;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    try {
      std::size_t used = 0;
      w.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw cgap::SpecParseError("bad conservation value '" + text + "' (expected k or k1;k2;...)");
    }
  }
  return w;
}

int cmd_gap(const RunConfig& cfg)
{
  const auto spec = cgap::load_model_spec(cfg.spec_path);
  cgap::SpectrumOptions opt;
  if (cfg.tol) opt.residual_tol = *cfg.tol;
  const auto report = cgap::spectral_gap(cgap::build_generator(spec, generator_options(cfg)), opt);
  std::cout << console_number(report.gap) << '\n';
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "gap,method,residual,states,multiplicity\n"
       << cgap::format_double(report.gap) << ',' << report.method << ','
       << cgap::format_double(report.tolerance_achieved) << ',' << report.states << ','
       << report.gap_multiplicity << '\n';
    emit(cfg, os.str());
  } else {
    nlohmann::json j = {{"spec", cgap::model_spec_to_json(spec)}, {"spectrum", cgap::to_json(report)}};
    emit(cfg, j.dump(2) + "\n");
  }
  return kOk;
}

int cmd_sweep(const RunConfig& cfg)
{
  const auto family = cgap::load_model_spec(cfg.spec_path);
  std::vector<cgap::Omega> omegas;
  if (cfg.omegas.empty()) {
    omegas = cgap::default_omegas(family);
  } else {
    for (const auto& s : cfg.omegas) omegas.push_back(parse_omega(s));
  }
  cgap::SpectrumOptions opt;
  if (cfg.tol) opt.residual_tol = *cfg.tol;
  const auto sweep = cgap::min_gap_over_omega(family, omegas, opt, generator_options(cfg), cfg.threads);
  const std::string csv = cgap::emit_sweep_csv(cgap::sweep_table(sweep));
  std::cout << csv;
  if (cfg.format == "json") {
    nlohmann::json j = {{"spec", cgap::model_spec_to_json(family)}, {"sweep", cgap::to_json(sweep)}};
    emit(cfg, j.dump(2) + "\n");
  } else {
    emit(cfg, csv);
  }
  return kOk;
}

int cmd_mc(const RunConfig& cfg)
{
  const auto spec = cgap::load_model_spec(cfg.spec_path);
  const auto model = cgap::ContinuumModel::from_spec(spec);
  const bool sphere = model.kind == cgap::ContinuumKind::Sphere;
  const int power = cfg.power > 0 ? cfg.power : (sphere ? 4 : 2);
  const auto chains =
      cgap::run_chains(model, cfg.events, cfg.chains, cfg.seed, cfg.dt, cgap::power_sum(power), cfg.threads);

  nlohmann::json diag = nlohmann::json::array();
  for (std::size_t c = 0; c < chains.size(); ++c)
    diag.push_back({{"chain", c},
                    {"seed", cgap::split_seed(cfg.seed, c)},
                    {"events", chains[c].events},
                    {"samples", chains[c].values.size()},
                    {"max_constraint_drift", chains[c].max_constraint_drift}});
  nlohmann::json j = {{"spec", cgap::model_spec_to_json(spec)},
                      {"observable", "sum eta_i^" + std::to_string(power)},
                      {"events_per_chain", cfg.events},
                      {"chains", cfg.chains},
                      {"seed", cfg.seed},
                      {"dt", cfg.dt},
                      {"window", {{"lag_min", cfg.lag_min}, {"lag_max", cfg.lag_max}}},
                      {"chain_diagnostics", diag}};
  const double n = static_cast<double>(model.n);
  if (sphere && power == 4) j["expected_rate"] = (n + 2) / (4 * n);
  if (!sphere && power == 2) j["expected_rate"] = (n + 1) / (3 * n);

  cgap::RateEstimate est;
  try {
    est = cgap::relaxation_rate_estimate(chains, {cfg.lag_min, cfg.lag_max, 4});
  } catch (const cgap::FitWindowError& e) {
    j["error"] = e.what();
    std::cerr << "collision_gap: estimation failed: " << e.what() << '\n';
    if (cfg.format != "csv") emit(cfg, j.dump(2) + "\n");
    return kEstimationError;
  }
  j["estimate"] = cgap::to_json(est);
  std::cout << "rate " << console_number(est.rate) << " stderr " << console_number(est.stderr_) << '\n';
  if (cfg.format == "csv") {
    std::ostringstream os;
    if (!chains.empty()) cgap::write_series_csv(os, chains.front());
    emit(cfg, os.str());
  } else {
    emit(cfg, j.dump(2) + "\n");
  }
  return kOk;
}

int cmd_verify(const RunConfig& cfg)
{
  cgap::SuiteOptions opt;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  if (cfg.tol) opt.tol = *cfg.tol;
  opt.lambda3 = cfg.lambda3;
  opt.only = cfg.only;
  if (!cfg.spec_path.empty()) opt.spec = cgap::load_model_spec(cfg.spec_path);
  const auto report = cgap::run_verification_suite(opt);
  std::cout << cgap::format_suite_table(report);
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "group,name,kind,bound,measured,margin,tolerance,asserted,pass\n";
    for (const auto& c : report.checks)
      os << c.group << ",\"" << c.name << "\"," << cgap::bound_kind_name(c.kind) << ','
         << cgap::format_double(c.bound) << ',' << cgap::format_double(c.measured) << ','
         << cgap::format_double(c.margin) << ',' << cgap::format_double(c.tolerance) << ','
         << (c.asserted ? 1 : 0) << ',' << (c.pass ? 1 : 0) << '\n';
    emit(cfg, os.str());
  } else {
    emit(cfg, cgap::to_json(report).dump(2) + "\n");
  }
  if (!report.pass()) {
    for (const auto& c : report.checks)
      if (c.asserted && !c.pass) std::cerr << "FAIL " << c.group << ": " << c.name << '\n';
    return kVerifyFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Spectral gaps of binary-collision Markov generators"};
  app.require_subcommand(1);
  RunConfig cfg;
  cfg.threads = default_threads();

  auto common = [&](CLI::App* sub, bool spec_required) {
    auto* spec = sub->add_option("--spec", cfg.spec_path, "model-spec JSON file");
    if (spec_required) spec->required();
    sub->add_option("--out", cfg.out_path, "report output path");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--threads", cfg.threads, "worker threads (default $COLLISION_GAP_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol", cfg.tol, "tolerance override");
    sub->add_option("--max-permutation-n", cfg.max_permutation_n, "largest permutation model to enumerate");
  };

  auto* gap = app.add_subcommand("gap", "spectral gap of one finite model");
  auto* sweep = app.add_subcommand("sweep", "gaps over conservation values and their minimum");
  auto* mc = app.add_subcommand("mc", "Monte Carlo relaxation rate of a continuous model");
  auto* verify = app.add_subcommand("verify", "run the bound verification suite");
  // Shared flags bind the same fields; exactly one subcommand is parsed.
  for (auto* sub : {gap, sweep, mc, verify}) {
    const bool needs_spec = sub != verify;
    const std::string fmt = sub == sweep ? "csv" : "json";
    sub->preparse_callback([&, fmt](std::size_t) { cfg.format = fmt; });
    common(sub, needs_spec);
  }
  sweep->add_option("--omega", cfg.omegas, "conservation value, k or k1;k2;... (repeatable)");
  mc->add_option("--events", cfg.events, "events per chain");
  mc->add_option("--chains", cfg.chains, "independent chains")->check(CLI::PositiveNumber);
  mc->add_option("--dt", cfg.dt, "sampling step in continuous time");
  mc->add_option("--lag-min", cfg.lag_min, "smallest fitted lag");
  mc->add_option("--lag-max", cfg.lag_max, "largest fitted lag");
  mc->add_option("--power", cfg.power, "observable sum eta_i^power (default 4 sphere, 2 simplex)");
  verify->add_option("--only", cfg.only, "run only these groups (repeatable)");
  verify->add_option("--lambda3", cfg.lambda3, "override bar-lambda(3) in the reduction checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gap) return cmd_gap(cfg);
    if (*sweep) return cmd_sweep(cfg);
    if (*mc) return cmd_mc(cfg);
    if (*verify) return cmd_verify(cfg);
  } catch (const cgap::ModelError& e) {
    std::cerr << "collision_gap: " << e.what() << '\n';
    return kModelError;
  } catch (const cgap::FitWindowError& e) {
    std::cerr << "collision_gap: estimation failed: " << e.what() << '\n';
    return kEstimationError;
  } catch (const cgap::ConvergenceError& e) {
    std::cerr << "collision_gap: " << e.what() << " after " << e.iterations() << " iterations\n";
    return kEstimationError;
  } catch (const std::exception& e) {
    std::cerr << "collision_gap: " << e.what() << '\n';
    return kModelError;
  }
  return kUsage;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cgap/errors.hpp"
#include "cgap/report_io.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace cgap;

TEST_CASE("number formatting round-trips")
{
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng) * std::pow(10.0, double(k % 40) - 20);
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK(format_double(kInfiniteGap) == "inf");
  CHECK(parse_double("inf") == kInfiniteGap);
  CHECK(parse_double("-inf") == -kInfiniteGap);
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(parse_double("1.5x"), SpecParseError);
  CHECK_THROWS_AS(parse_double(""), SpecParseError);
}

TEST_CASE("sweep CSV round-trips")
{
  const auto family = ModelSpec::exclusion({0.2, 0.45, 0.7, 0.35}, 0);
  const auto omegas = default_omegas(family);
  const auto table = sweep_table(min_gap_over_omega(family, omegas));
  const auto csv = emit_sweep_csv(table);
  CHECK(csv.rfind("omega,rho,gap,method,residual\n", 0) == 0);
  CHECK(csv.find("\n0,0,inf,degenerate,") != std::string::npos);
  const auto back = parse_sweep_csv(csv);
  CHECK(back == table);
  CHECK(emit_sweep_csv(back) == csv);

  const auto colored = ModelSpec::colored({0.5, 0.3, 0.6, 0.4, 0.5, 0.7}, 2, 1, {1, 1});
  const auto ctable = sweep_table(min_gap_over_omega(colored, default_omegas(colored)));
  const auto ccsv = emit_sweep_csv(ctable);
  CHECK(ccsv.find("\n1;1,") != std::string::npos);
  CHECK(parse_sweep_csv(ccsv) == ctable);

  CHECK_THROWS_AS(parse_sweep_csv("bogus\n"), SpecParseError);
  CHECK_THROWS_AS(parse_sweep_csv("omega,rho,gap,method,residual\n1,0.5,0.4,dense,0\n"), SpecParseError);
  CHECK_THROWS_AS(parse_sweep_csv("omega,rho,gap,method,residual\n1,0.5,0.4,dense\nbar_lambda,,0.4,,\n"),
                  SpecParseError);
  CHECK_THROWS_AS(parse_sweep_csv("omega,rho,gap,method,residual\nx,0.5,0.4,dense,0\nbar_lambda,,0.4,,\n"),
                  SpecParseError);
}

TEST_CASE("spectrum JSON")
{
  const auto r = spectral_gap(build_generator(ModelSpec::uniform_permutations(4)));
  const auto j = to_json(r);
  CHECK(j["gap"].get<double>() == r.gap);
  CHECK(j["infinite"] == false);
  CHECK(j["method"] == "dense");
  CHECK(j["states"] == 24);
  CHECK_FALSE(j.contains("gap_function"));
  CHECK(to_json(r, true)["gap_function"].size() == 24);

  const auto inf = spectral_gap(build_generator(ModelSpec::exclusion({0.5, 0.5, 0.5}, 0)));
  const auto ji = to_json(inf);
  CHECK(ji["gap"].is_null());
  CHECK(ji["infinite"] == true);
}

TEST_CASE("suite JSON is deterministic")
{
  SuiteOptions opt;
  opt.only = {"det-p", "clique4"};
  const auto a = to_json(run_verification_suite(opt)).dump(2);
  const auto b = to_json(run_verification_suite(opt)).dump(2);
  CHECK(a == b);
  const auto j = nlohmann::json::parse(a);
  CHECK(j["pass"] == true);
  CHECK(j["failures"] == 0);
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("bound"));
    CHECK(c.contains("margin"));
    CHECK(c.contains("inputs"));
  }
  const auto table = format_suite_table(run_verification_suite(opt));
  CHECK(table.find("PASS") != std::string::npos);
  CHECK(table.find(" 0 failures\n") != std::string::npos);
}

TEST_CASE("trajectory and series CSV")
{
  const ContinuumModel m{ContinuumKind::Sphere, 3, 1.0};
  const auto t = mc_trajectory(m, random_initial_state(m, 1), 5, 2);
  std::ostringstream os;
  write_trajectory_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "time,eta_1,eta_2,eta_3");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == t.times.size());

  ObservableSeries s;
  s.dt = 0.5;
  s.values = {1.0, 2.0};
  std::ostringstream ss;
  write_series_csv(ss, s);
  CHECK(ss.str() == "time,value\n0,1\n0.5,2\n");
}

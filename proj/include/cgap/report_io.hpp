#pragma once

#include "cgap/monte_carlo.hpp"
#include "cgap/spectra.hpp"
#include "cgap/theorems.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace cgap {

/// %.17g, with "inf" / "-inf" / "nan" spelled out.
std::string format_double(double x);
/// Inverse of format_double; throws SpecParseError on malformed text.
double parse_double(const std::string& text);

/// Infinite gaps are written as null with "infinite": true.
nlohmann::json to_json(const SpectrumReport& report, bool include_function = false);
nlohmann::json to_json(const GapOverOmega& sweep);
nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const SuiteReport& report);
nlohmann::json to_json(const RateEstimate& estimate);

std::string bound_kind_name(BoundKind kind);

/// One row of a conservation sweep table.
struct SweepRow
{
  Omega omega;
  double rho = 0.0;
  double gap = kInfiniteGap;
  std::string method;
  double residual = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepTable
{
  std::vector<SweepRow> rows;
  double minimum = kInfiniteGap;

  friend bool operator==(const SweepTable&, const SweepTable&) = default;
};

SweepTable sweep_table(const GapOverOmega& sweep);

/// Header "omega,rho,gap,method,residual"; omega components joined by ';'; a final
/// row "bar_lambda,,<minimum>,," closes the table.
std::string emit_sweep_csv(const SweepTable& table);
SweepTable parse_sweep_csv(const std::string& text);

/// Columns time, eta_1..eta_N.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);
/// Columns time, value on the sampling grid.
void write_series_csv(std::ostream& os, const ObservableSeries& series);

/// Fixed-width table of a suite run, one line per check.
std::string format_suite_table(const SuiteReport& report);

}  // namespace cgap

#include "cgap/report_io.hpp"

#include "cgap/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace cgap {

using nlohmann::json;

std::string format_double(double x)
{
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& text)
{
  if (text == "inf") return kInfiniteGap;
  if (text == "-inf") return -kInfiniteGap;
  if (text == "nan") return std::nan("");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw SpecParseError("not a number: '" + text + "'");
  return v;
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json to_json(const SpectrumReport& r, bool include_function)
{
  json j = {{"gap", finite_or_null(r.gap)},
            {"infinite", r.infinite()},
            {"eigenvalues", r.eigenvalues},
            {"residuals", r.residuals},
            {"gap_multiplicity", r.gap_multiplicity},
            {"method", r.method},
            {"tolerance_achieved", r.tolerance_achieved},
            {"iterations", r.iterations},
            {"states", r.states}};
  if (include_function)
    j["gap_function"] = std::vector<double>(r.gap_function.data(), r.gap_function.data() + r.gap_function.size());
  return j;
}

json to_json(const GapOverOmega& sweep)
{
  json entries = json::array();
  for (const auto& e : sweep.entries) entries.push_back({{"omega", e.omega}, {"rho", e.rho}, {"report", to_json(e.report)}});
  return {{"entries", entries}, {"minimum", finite_or_null(sweep.minimum)}};
}

std::string bound_kind_name(BoundKind kind)
{
  switch (kind) {
    case BoundKind::Lower: return "lower";
    case BoundKind::Upper: return "upper";
    case BoundKind::Equal: return "equal";
  }
  return "unknown";
}

json to_json(const BoundReport& r)
{
  json inputs = json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = finite_or_null(v);
  return {{"group", r.group},
          {"name", r.name},
          {"kind", bound_kind_name(r.kind)},
          {"inputs", inputs},
          {"bound", finite_or_null(r.bound)},
          {"measured", finite_or_null(r.measured)},
          {"margin", finite_or_null(r.margin)},
          {"tolerance", r.tolerance},
          {"asserted", r.asserted},
          {"pass", r.pass}};
}

json to_json(const SuiteReport& r)
{
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"groups", r.groups}, {"checks", checks}, {"failures", r.failures}, {"pass", r.pass()}};
}

json to_json(const RateEstimate& e)
{
  return {{"rate", e.rate},
          {"stderr", e.stderr_},
          {"batches", e.batches},
          {"batch_rates", e.batch_rates},
          {"lags", e.lags},
          {"log_autocorrelation", e.log_autocorrelation}};
}

// ---------------------------------------------------------------------------

SweepTable sweep_table(const GapOverOmega& sweep)
{
  SweepTable t;
  for (const auto& e : sweep.entries)
    t.rows.push_back({e.omega, e.rho, e.report.gap, e.report.method, e.report.tolerance_achieved});
  t.minimum = sweep.minimum;
  return t;
}

std::string emit_sweep_csv(const SweepTable& table)
{
  std::ostringstream os;
  os << "omega,rho,gap,method,residual\n";
  for (const auto& r : table.rows) {
    for (std::size_t k = 0; k < r.omega.size(); ++k) os << (k ? ";" : "") << r.omega[k];
    os << ',' << format_double(r.rho) << ',' << format_double(r.gap) << ',' << r.method << ','
       << format_double(r.residual) << '\n';
  }
  os << "bar_lambda,," << format_double(table.minimum) << ",,\n";
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

SweepTable parse_sweep_csv(const std::string& text)
{
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "omega,rho,gap,method,residual")
    throw SpecParseError("sweep CSV: missing header");
  SweepTable t;
  bool closed = false;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (closed) throw SpecParseError("sweep CSV line " + std::to_string(lineno) + ": data after bar_lambda row");
    const auto f = split(line, ',');
    if (f.size() != 5) throw SpecParseError("sweep CSV line " + std::to_string(lineno) + ": expected 5 fields");
    if (f[0] == "bar_lambda") {
      t.minimum = parse_double(f[2]);
      closed = true;
      continue;
    }
    SweepRow r;
    for (const auto& part : split(f[0], ';')) {
      try {
        std::size_t used = 0;
        r.omega.push_back(std::stoi(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      } catch (const std::exception&) {
        throw SpecParseError("sweep CSV line " + std::to_string(lineno) + ": bad omega '" + f[0] + "'");
      }
    }
    r.rho = parse_double(f[1]);
    r.gap = parse_double(f[2]);
    r.method = f[3];
    r.residual = parse_double(f[4]);
    t.rows.push_back(std::move(r));
  }
  if (!closed) throw SpecParseError("sweep CSV: missing bar_lambda row");
  return t;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory)
{
  os << "time";
  for (std::size_t i = 1; i <= trajectory.n; ++i) os << ",eta_" << i;
  os << '\n';
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    os << format_double(trajectory.times[k]);
    for (double v : trajectory.state(k)) os << ',' << format_double(v);
    os << '\n';
  }
}

void write_series_csv(std::ostream& os, const ObservableSeries& series)
{
  os << "time,value\n";
  for (std::size_t k = 0; k < series.values.size(); ++k)
    os << format_double(static_cast<double>(k) * series.dt) << ',' << format_double(series.values[k]) << '\n';
}

std::string format_suite_table(const SuiteReport& report)
{
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-5s %-14s %-62s %14s %14s %11s\n", "", "group", "check", "bound", "measured",
                "margin");
  os << buf;
  for (const auto& c : report.checks) {
    const char* status = !c.asserted ? "info" : c.pass ? "PASS" : "FAIL";
    std::string name = c.name.size() > 62 ? c.name.substr(0, 59) + "..." : c.name;
    std::snprintf(buf, sizeof buf, "%-5s %-14s %-62s %14.8g %14.8g %11.3e\n", status, c.group.c_str(), name.c_str(),
                  c.bound, c.measured, c.margin);
    os << buf;
  }
  os << report.checks.size() << " checks, " << report.failures << " failures\n";
  return os.str();
}

}  // namespace cgap

#pragma once

// Config loading, check/scan pipelines and the CSV/summary writers behind the
// curvgate command line tool.

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvgate/inequality_checker.hpp"

namespace curvgate {

// Bad or missing config entry; the CLI maps it to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ids accepted in `checks` and `expect.<id>`.
const std::vector<std::string>& check_ids();

struct RunConfig {
  std::string bundle;
  std::vector<std::string> checks = {"thmA", "thmB"};
  // A check listed here passes when its verdict matches. Holds also accepts
  // HoldsStrictly. Checks without an entry are treated as guaranteed: only a
  // Violated verdict fails them.
  std::map<std::string, Verdict> expect;

  SamplePlan plan;

  std::string metric_kind = "connection";  // connection | warped
  std::optional<double> metric_C;          // empty: doubling search
  double metric_r0 = 0.05;
  double metric_rmax = 0.5;

  std::string rf_kind = "zero";
  double rf_amplitude = 0.5;

  double eps_diam = 0.1;
  std::optional<double> eps_hypothesis;  // empty: largest passing power of 1/2
  double r_test = 0.05;
  double q3_radius = 0.05;
  double tol_algebraic = kAlgebraicTol;
  double tol_stencil = kStencilTol;

  std::vector<double> scan_radii = {0.01, 0.02, 0.05};

  std::string output = ".";
};

// Flat `key = value` lines, `#` comments. Unknown keys, malformed lines,
// unknown catalog ids and a missing plan.seed throw ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

struct CheckRun {
  std::vector<MarginReport> reports;     // in config order
  std::optional<EpsilonDelta> search;    // when the metric C was searched for
  double C = 0.0;                        // C of the total metric, 0 if none was built
  double eps_hypothesis = 0.0;
  std::vector<std::string> failures;     // one line per unexpected verdict
};

CheckRun run_checks(const RunConfig& cfg);

struct ScanRow {
  double radius = 0.0;
  int samples = 0;
  double min_sectional = 0.0;
  double max_sectional = 0.0;
  int worst_sample = -1;
};

struct ScanRun {
  std::vector<ScanRow> rows;  // in scan.radii order
  double C = 0.0;
  std::optional<EpsilonDelta> search;
};

ScanRun run_scan(const RunConfig& cfg);

// RFC 4180 field quoting.
std::string csv_field(const std::string& s);
// %.17g, so values round-trip.
std::string format_double(double v);

void write_report_csv(std::ostream& os, const std::vector<MarginReport>& reports);
void write_summary(std::ostream& os, const RunConfig& cfg, const CheckRun& run);
void write_scan_csv(std::ostream& os, const ScanRun& run);
void write_scan_summary(std::ostream& os, const RunConfig& cfg, const ScanRun& run);

// Runs, writes report.csv and summary.txt (scan.csv and scan_summary.txt for
// scans) under cfg.output and returns the exit status: 0 when every verdict is
// as expected, 1 otherwise.
int run_check_command(const RunConfig& cfg, std::ostream& log);
int run_scan_command(const RunConfig& cfg, std::ostream& log);

}  // namespace curvgate

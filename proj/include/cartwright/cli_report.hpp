#pragma once

// Command-line scenarios and their reports. The executable in tools/ is a
// thin wrapper around run_cli.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cartwright::cli {

using Json = nlohmann::ordered_json;

struct Scenario {
  std::string command;  // weight-check, mu-eval, surface-build, verify, example
  int n = 0;
  std::string weight;   // "family=... key=value ..."
  std::string theorem = "T1";

  // theta grid (verify) and single theta (surface-build)
  double theta_min = 1e-3, theta_max = 0.3;
  int theta_per_decade = 4;
  double theta = 0.01;

  // y grid (weight-check)
  double y_min = 1e-6, y_max = 1.0;
  int y_points = 200;

  // mu-eval
  double a = 0.0, y = 0.0, t = 0.0;
  std::string mode = "quadrature";  // quadrature, lemma1, smallangle, both

  // verify test function
  std::string test_function = "poisson";  // poisson, extremal
  double pole = 0.0;
  double y0 = 0.5;

  // example
  double h = 1e-3;
  double residual_threshold = 1e-6;

  // tolerances and overrides
  double quad_rel = 1e-9, quad_abs = 1e-12;
  std::optional<double> lambda;
  int surface_points = 10000;
  int samples = 1000;
  std::uint64_t seed = 42;
  int threads = 0;

  std::string out = "-";  // JSON report; "-" is stdout
  std::string csv;
  std::string plotdata;
  bool timing = false;
};

// Throws UsageError naming the offending token. A `--config FILE` of flat
// key=value lines is applied first; flags override it.
Scenario parse_scenario(const std::vector<std::string>& args);

Json scenario_json(const Scenario& s);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct ReportDocument {
  Json scenario;
  Json results = Json::array();
  Json summary;
  Json version;
  Table csv;
  Table plot;
  double seconds = 0.0;
  int exit_code = 0;  // 0 pass, 1 invariant failure, 3 numerical-accuracy failure
};

ReportDocument run_scenario(const Scenario& s);

// Numbers with 17 significant digits; key order preserved.
std::string serialize(const Json& j);
// {scenario, results, summary, version}, plus timing when requested.
Json report_json(const ReportDocument& doc, bool timing);

enum class Format { json, csv, plotdata };
// Throws std::ios_base::failure on an unwritable path; "-" writes to `out`.
void emit_report(const ReportDocument& doc, Format f, const std::string& path, bool timing, std::ostream& out);

// Full command line: parse, run, emit. Returns the process exit code
// (2 for usage and I/O errors).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cartwright::cli

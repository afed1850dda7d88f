#include "cartwright/cli_report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "cartwright/errors.hpp"

namespace cartwright::cli {

namespace {

struct HelpRequested {
  std::string text;
};

void add_output_options(CLI::App* sub, Scenario& s) {
  sub->add_option("--out", s.out, "JSON report path, - for stdout");
  sub->add_option("--csv", s.csv, "CSV table path");
  sub->add_option("--plotdata", s.plotdata, "plot columns path");
  sub->add_flag("--timing", s.timing, "add wall time to the report");
}

void add_n(CLI::App* sub, Scenario& s) { sub->add_option("--n", s.n, "dimension n (ball in R^(n+1))")->required(); }

// `--config FILE` becomes `--key value` tokens placed before the command-line
// flags, so that the flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest, from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] != "--config") {
      rest.push_back(args[i]);
      continue;
    }
    if (i + 1 >= args.size()) throw UsageError("--config: missing file name");
    const std::string path = args[++i];
    std::ifstream in(path);
    if (!in) throw UsageError("--config: cannot read '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError("--config: expected key=value, got '" + line + "'");
      auto trim = [](std::string v) {
        const auto l = v.find_first_not_of(" \t\r"), r = v.find_last_not_of(" \t\r");
        return l == std::string::npos ? std::string() : v.substr(l, r - l + 1);
      };
      const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
      if (key.empty()) throw UsageError("--config: empty key in '" + line + "'");
      if (val == "false") continue;
      from_file.push_back("--" + key);
      if (val != "true") from_file.push_back(val);
    }
  }
  if (from_file.empty() || rest.empty()) return rest;
  std::vector<std::string> out{rest.front()};
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

void validate(const Scenario& s) {
  if (s.n < 1) throw UsageError("--n: must be >= 1, got " + std::to_string(s.n));
  if (s.command == "weight-check") {
    if (!(s.y_min > 0.0 && s.y_min < s.y_max && s.y_max <= 1.0)) throw UsageError("--y-min/--y-max: need 0 < y-min < y-max <= 1");
    if (s.y_points < 2) throw UsageError("--y-points: must be >= 2");
  }
  if (s.command == "verify") {
    if (!(s.theta_min > 0.0 && s.theta_min <= s.theta_max && s.theta_max < 0.5)) {
      throw UsageError("--theta-min/--theta-max: need 0 < theta-min <= theta-max < 1/2");
    }
    if (s.theta_per_decade < 1) throw UsageError("--per-decade: must be >= 1");
    if (!(s.y0 > 0.0 && s.y0 < 1.0)) throw UsageError("--y0: must lie in (0, 1)");
    if (s.samples < 2) throw UsageError("--samples: must be >= 2");
  }
  if (s.command == "surface-build") {
    if (!(s.theta > 0.0 && s.theta < 0.5)) throw UsageError("--theta: must lie in (0, 1/2)");
    if (s.surface_points < 2) throw UsageError("--points: must be >= 2");
    if (s.samples < 2) throw UsageError("--samples: must be >= 2");
  }
  if (s.command == "mu-eval" && !(s.quad_rel > 0.0 && s.quad_abs > 0.0)) {
    throw UsageError("--quad-rel/--quad-abs: must be > 0");
  }
  if (s.command == "example" && !(s.h > 0.0 && s.residual_threshold > 0.0)) {
    throw UsageError("--step/--residual-threshold: must be > 0");
  }
  if (s.lambda && !(*s.lambda > 0.0 && *s.lambda < 1.0)) throw UsageError("--lambda: must lie in (0, 1)");
}

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void write(std::string& out, const Json& j, int indent) {
  const std::string pad(2 * (indent + 1), ' '), close(2 * indent, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(k).dump() + ": ";
        write(out, v, indent + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write(out, j[i], indent + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

std::string table_text(const Table& t, char sep, bool comment_header) {
  std::string out;
  if (comment_header) out += "# ";
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) out += sep;
    out += t.header[i];
  }
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += sep;
      if (std::isfinite(row[i])) {
        write_number(out, row[i]);
      } else {
        out += std::isnan(row[i]) ? "nan" : (row[i] > 0 ? "inf" : "-inf");
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const std::vector<std::string>& raw) {
  Scenario s;
  CLI::App app{"Numerical checks of boundary growth bounds for harmonic functions in the unit ball", "cartwright"};
  app.require_subcommand(1, 1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* wc = app.add_subcommand("weight-check", "regularity conditions and lemma checks for a weight");
  add_n(wc, s);
  wc->add_option("--weight", s.weight, "weight spec, e.g. \"family=power p=4\"")->required();
  wc->add_option("--y-min", s.y_min);
  wc->add_option("--y-max", s.y_max);
  wc->add_option("--y-points", s.y_points);

  auto* mu = app.add_subcommand("mu-eval", "averaged Poisson kernel at one point");
  add_n(mu, s);
  mu->add_option("--a", s.a, "polar angle of the point")->required();
  mu->add_option("--y", s.y, "depth 1 - |z|")->required();
  mu->add_option("--t", s.t, "cap angle")->required();
  mu->add_option("--mode", s.mode)->check(CLI::IsMember({"quadrature", "lemma1", "smallangle", "both"}));
  mu->add_option("--quad-rel", s.quad_rel);
  mu->add_option("--quad-abs", s.quad_abs);

  auto* sb = app.add_subcommand("surface-build", "comparison surface for the T1 pipeline weight at one theta");
  add_n(sb, s);
  sb->add_option("--weight", s.weight)->required();
  sb->add_option("--theta", s.theta);
  sb->add_option("--lambda", s.lambda);
  sb->add_option("--points", s.surface_points);
  sb->add_option("--samples", s.samples);
  sb->add_option("--seed", s.seed);

  auto* vf = app.add_subcommand("verify", "per-theta cap-average and Harnack checks");
  int cap_samples = 32;
  add_n(vf, s);
  vf->add_option("--theorem", s.theorem)->check(CLI::IsMember({"T1", "T2", "T2prime"}));
  vf->add_option("--weight", s.weight, "required for T1 and T2prime");
  vf->add_option("--theta-min", s.theta_min);
  vf->add_option("--theta-max", s.theta_max);
  vf->add_option("--per-decade", s.theta_per_decade);
  vf->add_option("--test", s.test_function)->check(CLI::IsMember({"poisson", "extremal"}));
  std::string pole = "0";
  vf->add_option("--pole", pole, "0 or pi")->check(CLI::IsMember({"0", "pi"}));
  vf->add_option("--y0", s.y0);
  vf->add_option("--lambda", s.lambda);
  vf->add_option("--samples", cap_samples, "surface samples per theta");
  vf->add_option("--seed", s.seed);
  vf->add_option("--threads", s.threads);

  auto* ex = app.add_subcommand("example", "the extremal log-polynomial example");
  add_n(ex, s);
  ex->add_option("--step", s.h, "finite-difference step in log rho and phi");
  ex->add_option("--residual-threshold", s.residual_threshold);

  for (auto* sub : {wc, mu, sb, vf, ex}) add_output_options(sub, s);

  auto args = expand_config(raw);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    const auto* sel = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    throw HelpRequested{sel->help()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  s.command = app.get_subcommands().front()->get_name();
  s.pole = pole == "pi" ? std::numbers::pi : 0.0;
  if (s.command == "verify") s.samples = cap_samples;
  if (s.command == "verify" && s.weight.empty() && s.theorem != "T2") {
    throw UsageError("--weight is required for " + s.theorem);
  }
  validate(s);
  return s;
}

Json scenario_json(const Scenario& s) {
  Json j;
  j["command"] = s.command;
  j["n"] = s.n;
  if (s.command == "weight-check") {
    j["weight"] = s.weight;
    j["y_grid"] = {{"min", s.y_min}, {"max", s.y_max}, {"points", s.y_points}};
  } else if (s.command == "mu-eval") {
    j["a"] = s.a;
    j["y"] = s.y;
    j["t"] = s.t;
    j["mode"] = s.mode;
    j["tolerances"] = {{"quad_rel", s.quad_rel}, {"quad_abs", s.quad_abs}};
  } else if (s.command == "surface-build") {
    j["weight"] = s.weight;
    j["theta"] = s.theta;
    j["lambda"] = s.lambda ? Json(*s.lambda) : Json("default");
    j["points"] = s.surface_points;
    j["samples"] = s.samples;
    j["seed"] = s.seed;
  } else if (s.command == "verify") {
    j["theorem"] = s.theorem;
    j["weight"] = s.weight.empty() ? Json("family=threshold") : Json(s.weight);
    j["theta_grid"] = {{"min", s.theta_min}, {"max", s.theta_max}, {"per_decade", s.theta_per_decade}};
    j["test_function"] = s.test_function;
    if (s.test_function == "poisson") {
      j["pole"] = s.pole == 0.0 ? "0" : "pi";
      j["y0"] = s.y0;
    }
    j["lambda"] = s.lambda ? Json(*s.lambda) : Json("default");
    j["samples"] = s.samples;
    j["seed"] = s.seed;
  } else if (s.command == "example") {
    j["h"] = s.h;
    j["residual_threshold"] = s.residual_threshold;
  }
  return j;
}

std::string serialize(const Json& j) {
  std::string out;
  write(out, j, 0);
  out += "\n";
  return out;
}

Json report_json(const ReportDocument& doc, bool timing) {
  Json j;
  j["scenario"] = doc.scenario;
  j["results"] = doc.results;
  j["summary"] = doc.summary;
  j["version"] = doc.version;
  if (timing) j["timing"] = {{"seconds", doc.seconds}};
  return j;
}

void emit_report(const ReportDocument& doc, Format f, const std::string& path, bool timing, std::ostream& out) {
  std::string text;
  switch (f) {
    case Format::json: text = serialize(report_json(doc, timing)); break;
    case Format::csv: text = table_text(doc.csv, ',', false); break;
    case Format::plotdata: text = table_text(doc.plot, ' ', true); break;
  }
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  file << text;
  file.flush();
  if (!file) throw std::ios_base::failure("write to '" + path + "' failed");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Scenario s;
  try {
    s = parse_scenario(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  const auto t0 = std::chrono::steady_clock::now();
  ReportDocument doc;
  try {
    doc = run_scenario(s);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  doc.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    emit_report(doc, Format::json, s.out, s.timing, out);
    if (!s.csv.empty()) emit_report(doc, Format::csv, s.csv, s.timing, out);
    if (!s.plotdata.empty()) emit_report(doc, Format::plotdata, s.plotdata, s.timing, out);
  } catch (const std::ios_base::failure& e) {
    err << "I/O error: " << e.what() << "\n";
    return 2;
  }
  if (doc.exit_code != 0) err << "summary: fail (exit " << doc.exit_code << ")\n";
  return doc.exit_code;
}

}  // namespace cartwright::cli

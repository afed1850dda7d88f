#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cartwright/cli_report.hpp"
#include "cartwright/errors.hpp"

using namespace cartwright;
using namespace cartwright::cli;

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : s) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ' ' && !quoted) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string body(const ReportDocument& d) { return serialize(report_json(d, false)); }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cartwright_cli_test_" + name);
}

}  // namespace

TEST_CASE("parse: verify echo") {
  const auto s = parse_scenario(
      split("verify --theorem T1 --n 2 --weight \"family=power p=5\" --theta-min 1e-3 --theta-max 0.3"));
  CHECK(s.command == "verify");
  CHECK(s.theorem == "T1");
  CHECK(s.n == 2);
  CHECK(s.weight == "family=power p=5");
  CHECK(s.theta_min == 1e-3);
  CHECK(s.theta_max == 0.3);
  CHECK(s.samples == 32);
  const auto j = scenario_json(s);
  CHECK(j["theorem"] == "T1");
  CHECK(j["weight"] == "family=power p=5");
}

TEST_CASE("parse: mu-eval echo") {
  const auto s = parse_scenario(split("mu-eval --n 1 --a 0.8 --y 0.01 --t 0.4 --mode both"));
  CHECK(s.command == "mu-eval");
  CHECK(s.n == 1);
  CHECK(s.a == 0.8);
  CHECK(s.y == 0.01);
  CHECK(s.t == 0.4);
  CHECK(s.mode == "both");
}

TEST_CASE("parse: usage errors name the offending token") {
  auto msg = [](const std::string& line) {
    try {
      parse_scenario(split(line));
    } catch (const UsageError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg("verify --theorem T1 --weight \"family=power p=5\"").find("--n") != std::string::npos);
  CHECK(msg("verify --n 2 --theorem T1 --bogus 3").find("--bogus") != std::string::npos);
  CHECK(msg("verify --n 2 --theorem T3 --weight \"family=power p=5\"").find("T3") != std::string::npos);
  CHECK(msg("verify --n 2 --theorem T1").find("--weight") != std::string::npos);
  CHECK(msg("verify --n 2 --weight \"family=power p=5\" --theta-min 0.2 --theta-max 0.1").find("--theta-min") !=
        std::string::npos);
  CHECK(msg("weight-check --n 0 --weight \"family=power p=5\"").find("--n") != std::string::npos);
  CHECK(msg("weight-check --n 2 --weight \"family=power p=5\" --y-points 1").find("--y-points") != std::string::npos);
  CHECK(msg("mu-eval --n 1 --a 0.8 --y 0.01 --t 0.4 --quad-rel 0").find("--quad-rel") != std::string::npos);
  CHECK(msg("frobnicate --n 2") != "");
  CHECK(msg("") != "");
}

TEST_CASE("parse: malformed weight spec is a usage error at run time") {
  const auto s = parse_scenario(split("weight-check --n 2 --weight \"family=nope\""));
  CHECK_THROWS_AS(run_scenario(s), UsageError);
  std::ostringstream out, err;
  CHECK(run_cli(split("weight-check --n 2 --weight \"p=3\""), out, err) == 2);
  CHECK(err.str().find("family") != std::string::npos);
}

TEST_CASE("parse: config file, flags override") {
  const auto path = temp_file("config.txt");
  {
    std::ofstream f(path);
    f << "# scenario\nn = 3\ntheorem=T2prime\nweight = family=power p=1\ntheta-min=0.01\ntiming=false\n";
  }
  const auto s = parse_scenario({"verify", "--config", path.string(), "--n", "2"});
  CHECK(s.n == 2);
  CHECK(s.theorem == "T2prime");
  CHECK(s.weight == "family=power p=1");
  CHECK(s.theta_min == 0.01);
  CHECK_FALSE(s.timing);
  {
    std::ofstream f(path);
    f << "nonsense line\n";
  }
  CHECK_THROWS_AS(parse_scenario({"verify", "--config", path.string(), "--n", "2"}), UsageError);
  {
    std::ofstream f(path);
    f << "unknown-key = 1\n";
  }
  CHECK_THROWS_AS(parse_scenario({"verify", "--config", path.string(), "--n", "2"}), UsageError);
  CHECK_THROWS_AS(parse_scenario({"verify", "--config", "/nonexistent/file", "--n", "2"}), UsageError);
  std::filesystem::remove(path);
}

TEST_CASE("serialize: 17 significant digits and round trip") {
  Json j;
  j["a"] = 0.1;
  j["b"] = 1.0;
  j["c"] = 3;
  j["d"] = "x\"y";
  j["e"] = Json::array({1e-300, -2.5, true, nullptr});
  j["f"] = Json::object();
  const auto text = serialize(j);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  const auto back = Json::parse(text);
  CHECK(serialize(back) == text);
  CHECK(back["a"].get<double>() == 0.1);
}

TEST_CASE("report: empty results are valid JSON with pass = true") {
  ReportDocument d;
  d.summary["pass"] = true;
  const auto text = body(d);
  const auto j = Json::parse(text);
  CHECK(j["results"].is_array());
  CHECK(j["results"].empty());
  CHECK(j["summary"]["pass"] == true);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"scenario", "results", "summary", "version"});
  CHECK(Json::parse(serialize(report_json(d, true))).contains("timing"));
}

TEST_CASE("weight-check: power(p = n) fails the first theorem's hypotheses") {
  const auto d = run_scenario(parse_scenario(split("weight-check --n 2 --weight \"family=power p=2\"")));
  const auto j = Json::parse(body(d));
  CHECK(j["results"][0]["ar_delta"].get<double>() == 0.0);
  CHECK(j["summary"]["verdicts"]["Theorem 1 hypotheses"] == "fail");
  CHECK(j["summary"]["pass"] == true);
  CHECK(d.exit_code == 0);
  const auto ok = run_scenario(parse_scenario(split("weight-check --n 2 --weight \"family=power p=4\"")));
  CHECK(ok.summary["verdicts"]["Theorem 1 hypotheses"] == "pass");
}

TEST_CASE("report: every number finite or marked") {
  const auto d = run_scenario(parse_scenario(split("weight-check --n 2 --weight \"family=power p=2\"")));
  const auto j = Json::parse(body(d));
  std::function<void(const Json&)> walk = [&](const Json& v) {
    if (v.is_number_float()) CHECK(std::isfinite(v.get<double>()));
    if (v.is_structured())
      for (const auto& c : v) walk(c);
  };
  walk(j);
  CHECK(j["results"][0]["rippon_integral"] == "divergent");
  CHECK(body(d).find("null") == std::string::npos);
}

TEST_CASE("surface-build: export columns") {
  const auto d = run_scenario(parse_scenario(split("surface-build --n 1 --weight \"family=power p=2\" --theta 0.01 --samples 50")));
  CHECK(d.csv.header == std::vector<std::string>{"y", "gamma", "k_of_y", "mu_at_beta", "va_value"});
  CHECK(d.csv.rows.size() == 50u);
  CHECK(d.summary["pass"] == true);
}

TEST_CASE("example: report fields and exit code") {
  const auto d = run_scenario(parse_scenario(split("example --n 2")));
  const auto j = Json::parse(body(d));
  CHECK(j["results"][0].contains("pde_residual_max"));
  CHECK(j["results"][0].contains("log_exponent_fit"));
  CHECK(d.csv.header.size() == 5u);
  CHECK(d.plot.header == std::vector<std::string>{"rho", "V_axis"});
  // the residual threshold and the exponent fit are known red for n = 2
  CHECK(d.exit_code == 1);
  const auto one = run_scenario(parse_scenario(split("example --n 1")));
  CHECK(one.exit_code == 0);
  CHECK(one.results.size() == 2u);
}

TEST_CASE("determinism: identical invocations give identical bodies") {
  for (const char* line : {"verify --theorem T1 --n 1 --weight \"family=power p=2\" --theta-min 1e-3 --theta-max 0.1",
                           "example --n 3", "surface-build --n 2 --weight \"family=power p=4\" --theta 0.1"}) {
    const auto a = run_scenario(parse_scenario(split(line)));
    const auto b = run_scenario(parse_scenario(split(line)));
    CAPTURE(line);
    CHECK(body(a) == body(b));
  }
  const auto t1 = run_scenario(parse_scenario(split("verify --theorem T1 --n 1 --weight \"family=power p=2\" --threads 1")));
  const auto t4 = run_scenario(parse_scenario(split("verify --theorem T1 --n 1 --weight \"family=power p=2\" --threads 4")));
  CHECK(body(t1) != "");
  // the thread count is not part of the scenario echo, so bodies agree
  CHECK(body(t1) == body(t4));
}

TEST_CASE("run_cli: exit codes and output files") {
  std::ostringstream out, err;
  CHECK(run_cli(split("mu-eval --n 1 --a 0.8 --y 0.01 --t 0.4"), out, err) == 0);
  CHECK(Json::parse(out.str())["summary"]["pass"] == true);
  CHECK(run_cli(split("mu-eval --a 0.8 --y 0.01 --t 0.4"), out, err) == 2);
  CHECK(run_cli(split("mu-eval --n 1 --a 0.8 --y 0.01 --t 0.4 --out /nonexistent/dir/r.json"), out, err) == 2);
  CHECK(err.str().find("I/O error") != std::string::npos);
  // T1 on a weight without the hypotheses: a hard failure with its stage
  std::ostringstream o2;
  CHECK(run_cli(split("verify --theorem T1 --n 1 --weight \"family=power p=1\""), o2, err) == 1);
  CHECK(Json::parse(o2.str())["results"][0]["error"]["type"] == "domain");
  const auto csv = temp_file("out.csv"), dat = temp_file("out.dat"), js = temp_file("out.json");
  CHECK(run_cli({"mu-eval", "--n", "1", "--a", "0.8", "--y", "0.01", "--t", "0.4", "--mode", "both", "--out", js.string(),
                 "--csv", csv.string(), "--plotdata", dat.string()},
                out, err) == 0);
  std::ifstream c(csv);
  std::string header;
  std::getline(c, header);
  CHECK(header == "a,y,t,mu_quadrature,mu_lemma1");
  std::ifstream p(dat);
  std::getline(p, header);
  CHECK(header == "# a y t mu_quadrature mu_lemma1");
  std::ifstream jf(js);
  std::stringstream buf;
  buf << jf.rdbuf();
  CHECK(Json::parse(buf.str())["scenario"]["mode"] == "both");
  for (const auto& f : {csv, dat, js}) std::filesystem::remove(f);
  std::ostringstream help;
  CHECK(run_cli({"--help"}, help, err) == 0);
  CHECK(help.str().find("verify") != std::string::npos);
}

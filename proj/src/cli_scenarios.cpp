#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "cartwright/bound_verifier.hpp"
#include "cartwright/cli_report.hpp"
#include "cartwright/errors.hpp"
#include "cartwright/extremal_example.hpp"

namespace cartwright::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

// Finite numbers as numbers, the rest as explicit markers.
Json jnum(double v) {
  if (std::isfinite(v)) return Json(v);
  if (std::isnan(v)) return Json("undefined");
  return Json(v > 0 ? "+unbounded" : "-unbounded");
}

std::string hash_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Checks {
  Json list = Json::array();
  bool all = true;
  void add(const std::string& name, bool pass) {
    list.push_back({{"name", name}, {"pass", pass}});
    all = all && pass;
  }
};

Json weight_check(const Scenario& s, ReportDocument& doc, Checks& checks) {
  const ball::Dimension n(s.n);
  const auto w = weights::parse_weight_spec(s.weight, n);
  const auto grid = weights::default_grid(s.y_points, s.y_min, s.y_max);
  const auto rc = weights::check_conditions(n, w, grid);
  Json cond;
  cond["stage"] = "conditions";
  cond["weight"] = w.describe();
  cond["als_pass"] = rc.als_pass;
  cond["als_sup"] = jnum(rc.als_sup);
  cond["ar_delta"] = jnum(rc.ar_delta);
  cond["ar_delta_near0"] = jnum(rc.ar_delta_near0);
  cond["near0_y0"] = rc.near0_y0;
  cond["min_ratio_slope"] = jnum(rc.min_ratio_slope);
  cond["argmin_ratio_slope"] = jnum(rc.argmin_ratio_slope);
  if (rc.poly_growth) {
    cond["poly_growth"] = {{"N", jnum(rc.poly_growth->N)},
                           {"epsilon", jnum(rc.poly_growth->epsilon)},
                           {"holds", rc.poly_growth->holds}};
  } else {
    cond["poly_growth"] = nullptr;
  }
  cond["rippon_integral"] = rc.rippon.divergent ? Json("divergent") : jnum(rc.rippon.value);
  cond["borichev_class"] = weights::borichev_name(rc.borichev);
  cond["borichev_fit_slope"] = jnum(rc.borichev_fit_slope);
  cond["borichev_limit"] = jnum(rc.borichev_limit);
  doc.results.push_back(cond);

  const bool t1 = rc.als_pass && (rc.ar_delta > 0.0 || rc.ar_delta_near0 > 0.0);
  const bool t2p = !rc.rippon.divergent;
  const std::vector<double> thetas{1e-3, 1e-2, 0.1, 0.5};
  Json dbl;
  dbl["stage"] = "doubling";
  dbl["records"] = Json::array();
  bool dbl_pass = true;
  for (double th : thetas) {
    const auto d = weights::verify_lemma_doubling(w, th);
    dbl["records"].push_back({{"theta", th},
                              {"alpha", jnum(d.alpha)},
                              {"ratio", jnum(d.ratio)},
                              {"pass_quarter", d.pass_quarter},
                              {"pass_doubling", d.pass_doubling}});
    dbl_pass = dbl_pass && d.pass_quarter && d.pass_doubling;
  }
  doc.results.push_back(dbl);

  Json wi;
  wi["stage"] = "weighted_integral";
  const double delta = rc.ar_delta > 0.0 ? rc.ar_delta : rc.ar_delta_near0;
  bool wi_pass = true;
  if (delta > 0.0) {
    wi["delta"] = delta;
    wi["records"] = Json::array();
    for (double th : thetas) {
      const auto r = weights::verify_weighted_integral_bound(n, w, th, delta);
      wi["records"].push_back({{"theta", th},
                               {"lhs_normalized", jnum(r.lhs_normalized)},
                               {"rhs_normalized", jnum(r.rhs_normalized)},
                               {"pass", r.pass}});
      wi_pass = wi_pass && r.pass;
    }
  } else {
    wi["skipped"] = "no positive delta";
  }
  doc.results.push_back(wi);

  // The lemmas are only claimed under the first theorem's hypotheses.
  if (t1) {
    checks.add("doubling", dbl_pass);
    checks.add("weighted_integral", wi_pass);
  }
  Json verdicts;
  verdicts["Theorem 1 hypotheses"] = t1 ? "pass" : "fail";
  verdicts["Theorem 2prime hypotheses"] = t2p ? "pass" : "fail";
  for (double y : grid) doc.csv.rows.push_back({y, w.log_value(y), w.ratio_slope(y)});
  doc.csv.header = {"y", "log_w", "ratio_slope"};
  doc.plot.header = {"y", "log_w"};
  for (double y : grid) doc.plot.rows.push_back({y, w.log_value(y)});
  return verdicts;
}

Json mu_eval(const Scenario& s, ReportDocument& doc, Checks&) {
  const ball::Dimension n(s.n);
  numerics::QuadConfig cfg = ball::default_quad_config();
  cfg.rel_tol = s.quad_rel;
  cfg.abs_tol = s.quad_abs;
  std::vector<std::pair<std::string, ball::MuMode>> modes;
  if (s.mode == "quadrature" || s.mode == "both") modes.emplace_back("quadrature", ball::MuMode::quadrature);
  if (s.mode == "lemma1" || s.mode == "both") modes.emplace_back("lemma1", ball::MuMode::lemma1_estimate);
  if (s.mode == "smallangle") modes.emplace_back("smallangle", ball::MuMode::smallangle_estimate);
  Json r;
  r["stage"] = "mu";
  std::vector<double> row{s.a, s.y, s.t};
  doc.csv.header = {"a", "y", "t"};
  std::vector<double> vals;
  for (const auto& [name, mode] : modes) {
    const auto v = ball::averaged_kernel(n, s.a, s.y, s.t, mode, cfg);
    const double val = v.unbounded ? std::numeric_limits<double>::infinity() : v.value;
    r[name] = jnum(val);
    row.push_back(val);
    vals.push_back(val);
    doc.csv.header.push_back("mu_" + name);
  }
  if (modes.size() == 2) r["ratio_quadrature_over_lemma1"] = jnum(vals[0] / vals[1]);
  doc.results.push_back(r);
  doc.csv.rows.push_back(row);
  doc.plot = doc.csv;
  return Json::object();
}

Json surface_build(const Scenario& s, ReportDocument& doc, Checks& checks) {
  const ball::Dimension n(s.n);
  const int nn = s.n;
  const auto w = weights::parse_weight_spec(s.weight, n);
  const double theta = s.theta;
  const double alpha = weights::alpha(w, theta);
  const double ld = w.log_value(theta) + nn * std::log(alpha);
  surface::Fn k = [w, theta, ld](double y) { return std::exp(w.log_value(y + theta - y * theta) - ld); };
  surface::Fn dk = [w, theta, ld](double y) {
    const double x = y + theta - y * theta;
    return std::exp(w.log_value(x) - ld) * w.log_slope(x) * (1.0 - theta);
  };
  const double lambda = s.lambda ? *s.lambda : surface::default_lambda();
  const auto pw = surface::normalize_pipeline(n, k, lambda, alpha, dk);
  const auto sf = surface::build_surface(n, pw.kw, s.surface_points);
  const auto va = surface::build_va(n, sf);
  const auto b = surface::verify_surface_bounds(n, sf, va, s.samples, s.seed);
  const double cont = std::abs(sf.gamma_inner(sf.s()) - sf.gamma_outer(sf.s()));
  const double end = std::abs(sf.gamma(sf.rho()) - std::numbers::pi);
  Json r;
  r["stage"] = "surface";
  r["beta"] = alpha;
  r["lambda"] = lambda;
  r["D_measured"] = jnum(pw.D_measured);
  r["D"] = jnum(pw.D);
  r["k_tilde_0"] = jnum(pw.k_tilde_0);
  r["scale"] = jnum(pw.scale);
  r["s"] = sf.s();
  r["rho"] = sf.rho();
  r["branch_gap_at_s"] = cont;
  r["gamma_at_rho_minus_pi"] = end;
  r["va_at_origin"] = jnum(va.va_at_origin);
  r["ylphb_pass"] = b.ylphb_pass;
  r["ylphb_max"] = jnum(b.ylphb_max);
  r["mu_over_k"] = {{"min", jnum(b.mu_over_k_min)}, {"max", jnum(b.mu_over_k_max)}};
  r["va_over_k"] = {{"min", jnum(b.va_over_k_min)}, {"max", jnum(b.va_over_k_max)}};
  doc.results.push_back(r);
  checks.add("branch continuity at s (1e-10)", cont < 1e-10);
  checks.add("gamma(rho) = pi (1e-8)", end < 1e-8);
  checks.add("s <= lambda beta", sf.s() <= lambda * alpha);
  checks.add("y <= gamma(y) - beta", b.ylphb_pass);
  checks.add("v_a / k bounded below", b.va_over_k_min > 0.0);
  doc.csv.header = {"y", "gamma", "k_of_y", "mu_at_beta", "va_value"};
  for (const auto& smp : b.samples) doc.csv.rows.push_back({smp.y, smp.gamma, smp.k, smp.mu_at_beta, smp.va});
  doc.plot.header = {"y", "gamma"};
  const auto& yg = sf.y_grid();
  const auto& gg = sf.gamma_grid();
  for (std::size_t i = 0; i < yg.size(); ++i) doc.plot.rows.push_back({yg[i], gg[i]});
  return Json::object();
}

Json cap_json(const verify::CapBoundRecord& c) {
  return {{"beta", c.beta},          {"D_measured", jnum(c.D_measured)}, {"D", jnum(c.D)},
          {"k0_beta_n", jnum(c.k0_beta_n)}, {"lhs", jnum(c.lhs)},       {"rhs", jnum(c.rhs)},
          {"C_ref", jnum(c.C_ref)},  {"C_measured", jnum(c.C_measured)}, {"K", jnum(c.K)},
          {"lambda", c.lambda},      {"halvings", c.halvings},         {"va0", jnum(c.va0)},
          {"C_sf2", jnum(c.C_sf2)},  {"slack", jnum(c.slack)},         {"slack_pass", c.slack_pass},
          {"pass", c.pass}};
}

Json harnack_json(const verify::HarnackRecord& h) {
  return {{"C1", jnum(h.C1)},          {"C2", jnum(h.C2)},        {"C3", jnum(h.C3)},
          {"wav1_ratio", jnum(h.wav1_ratio)}, {"wav2_ratio", jnum(h.wav2_ratio)},
          {"wav1_pass", h.wav1_pass},  {"wav2_pass", h.wav2_pass}, {"value", jnum(h.value)},
          {"bound", jnum(h.bound)},    {"ratio", jnum(h.ratio)},  {"failed", h.failed},
          {"pass", h.pass}};
}

Json verify_cmd(const Scenario& s, ReportDocument& doc, Checks& checks) {
  const ball::Dimension n(s.n);
  const auto th = verify::parse_theorem(s.theorem);
  const auto w = s.weight.empty() ? weights::Weight::threshold(n) : weights::parse_weight_spec(s.weight, n);
  const auto U = s.test_function == "extremal" ? extremal::extremal_test_function(s.n)
                                               : verify::make_poisson_test(n, s.pole, s.y0, w);
  verify::PipelineConfig cfg;
  if (s.lambda) cfg.cap.lambda = *s.lambda;
  cfg.cap.surface_samples = s.samples;
  cfg.cap.seed = s.seed;
  cfg.threads = s.threads;
  const auto rep = verify::run_pipeline(n, th, w, U, verify::theta_grid(s.theta_min, s.theta_max, s.theta_per_decade), cfg);
  Json head;
  head["stage"] = "pipeline";
  head["theorem"] = verify::theorem_name(rep.theorem);
  head["weight"] = rep.weight;
  head["test_function"] = rep.test_function;
  head["lambda"] = rep.lambda;
  if (th == verify::Theorem::T2prime) head["I0"] = jnum(rep.I0);
  head["C3_max"] = jnum(rep.C3_max);
  head["C3_min"] = jnum(rep.C3_min);
  head["C_measured_max"] = jnum(rep.C_measured_max);
  head["K_max"] = jnum(rep.K_max);
  head["records"] = Json::array();
  doc.csv.header = {"theta", "alpha", "D", "k0_beta_n", "lhs", "rhs", "C_measured", "K", "slack", "C3", "ratio", "pass"};
  doc.plot.header = {"theta", "ratio", "C3"};
  for (const auto& r : rep.records) {
    head["records"].push_back({{"theta", r.theta},
                               {"alpha", r.alpha},
                               {"cap", cap_json(r.cap)},
                               {"harnack", harnack_json(r.harnack)},
                               {"C3_measured", jnum(r.C3_measured)},
                               {"d_bound_pass", r.d_bound_pass},
                               {"pass", r.pass}});
    doc.csv.rows.push_back({r.theta, r.alpha, r.cap.D, r.cap.k0_beta_n, r.cap.lhs, r.cap.rhs, r.cap.C_measured,
                            r.cap.K, r.cap.slack, r.harnack.C3, r.harnack.ratio, r.pass ? 1.0 : 0.0});
    doc.plot.rows.push_back({r.theta, r.harnack.ratio, r.harnack.C3});
  }
  doc.results.push_back(head);
  checks.add("all theta records pass", rep.pass);
  return Json::object();
}

Json example_closed_form(ReportDocument& doc, Checks& checks) {
  for (bool variant : {false, true}) {
    const auto r = extremal::verify_closed_form_n1(variant);
    doc.results.push_back({{"stage", variant ? "closed_form_variant" : "closed_form"},
                           {"formula", variant ? "Re(-log^2(1-z)/(1-z))" : "Re(-(1-z) log^2(1-z))"},
                           {"harmonic_residual_max", jnum(r.harmonic_residual_max)},
                           {"axis_ratio_1e-8", jnum(r.axis_ratio_small)},
                           {"axis_ratio_1e-4", jnum(r.axis_ratio_mid)},
                           {"upper_C", jnum(r.upper_C)}});
    checks.add(std::string(variant ? "variant" : "closed form") + " harmonic (1e-8)", r.harmonic_residual_max < 1e-8);
  }
  doc.csv.header = {"x", "U", "U_variant"};
  for (int i = 0; i <= 200; ++i) {
    const double x = i <= 100 ? -0.99 + 1.89 * i / 100.0 : 1.0 - 0.1 * std::pow(1e-8, (i - 100) / 100.0);
    doc.csv.rows.push_back({x, extremal::closed_form_n1(x, 0.0), extremal::closed_form_n1_variant(x, 0.0)});
  }
  doc.plot = doc.csv;
  return Json::object();
}

Json example_cmd(const Scenario& s, ReportDocument& doc, Checks& checks) {
  if (s.n == 1) return example_closed_form(doc, checks);
  const int n = s.n;
  const auto sol = extremal::build_cascade(n);
  // ODE residual of every member, second derivative from differences of f'
  double cascade_res = 0.0;
  for (int k = n; k >= 0; --k) {
    const auto& f = sol.f[k];
    for (double t : {0.03, 0.1, 0.2, 0.31, 0.44, 0.6, 0.7, 0.8, 0.86, 0.91, 0.96, 0.98, 0.99}) {
      const double h = 1e-5;
      const double f2 = k + 2 <= n + 1 ? sol.f[k + 2](t) : 0.0;
      const double r = -(k + 1.0) * ((n + 1.0) * sol.f[k + 1](t) + (k + 2.0) * f2);
      const double fpp = (f.derivative(t + h) - f.derivative(t - h)) / (2.0 * h);
      cascade_res = std::max(cascade_res, std::abs((1.0 - t * t) * fpp - n * t * f.derivative(t) + n * f(t) - r));
    }
  }
  extremal::ExampleGrids g;
  g.h = s.h;
  g.residual_threshold = s.residual_threshold;
  const auto rec = extremal::verify_example(sol, g);
  Json r;
  r["stage"] = "example";
  r["g_min"] = jnum(sol.homs->g_min());
  r["frobenius"] = {{"A", jnum(sol.homs->series().A)}, {"tail_ratio", jnum(sol.homs->series().tail_ratio)}};
  Json f1;
  for (int k = 0; k <= n + 1; ++k) f1.push_back(jnum(sol.f[k](1.0)));
  r["f_at_1"] = f1;
  r["cascade_residual_max"] = jnum(cascade_res);
  r["pde_residual_max"] = jnum(rec.pde_residual_max);
  r["pde_residual_max_half_h"] = jnum(rec.pde_residual_max_half);
  r["convergence_ratio"] = jnum(rec.convergence_ratio);
  r["upper_C"] = jnum(rec.upper_C);
  r["upper_M"] = jnum(rec.upper_M);
  r["lower_C1"] = jnum(rec.lower_C1);
  r["log_exponent_fit"] = jnum(rec.log_exponent_fit);
  r["log_exponent_fit_deep"] = jnum(rec.log_exponent_fit_deep);
  r["last_decade_spread"] = jnum(rec.last_decade_spread);
  doc.results.push_back(r);
  checks.add("cascade residual (1e-7)", cascade_res < 1e-7);
  checks.add("pde residual below threshold", rec.residual_pass);
  checks.add("pde residual second order (3.5..4.5)", rec.convergence_ratio >= 3.5 && rec.convergence_ratio <= 4.5);
  checks.add("lower C1 > 0", rec.lower_C1 > 0.0);
  checks.add("log exponent fit n+1 +- 0.15", std::abs(rec.log_exponent_fit - (n + 1.0)) <= 0.15);
  checks.add("last decade spread < 20%", rec.last_decade_spread < 0.2);
  checks.add("upper C finite", std::isfinite(rec.upper_C));

  doc.csv.header = {"t"};
  for (int k = 0; k <= n + 1; ++k) doc.csv.header.push_back("f" + std::to_string(k));
  for (int i = 0; i <= 240; ++i) {
    const double t = i <= 200 ? i / 200.0 * 0.99 : 1.0 - 0.01 * std::pow(1e-10, (i - 200) / 40.0);
    std::vector<double> row{t};
    for (int k = 0; k <= n + 1; ++k) row.push_back(sol.f[k](t));
    doc.csv.rows.push_back(row);
  }
  doc.plot.header = {"rho", "V_axis"};
  for (int i = 0; i <= 160; ++i) {
    const double rho = std::pow(10.0, -8.0 + 8.0 * i / 160.0);
    doc.plot.rows.push_back({rho, extremal::assemble_V(sol, rho, 0.0)});
  }
  return Json::object();
}

}  // namespace

ReportDocument run_scenario(const Scenario& s) {
  ReportDocument doc;
  doc.scenario = scenario_json(s);
  doc.version = {{"tool", "cartwright"}, {"version", kVersion}, {"config_hash", hash_hex(serialize(doc.scenario))}};
  Checks checks;
  Json verdicts = Json::object();
  std::string stage = s.command;
  auto fail = [&](const char* kind, const std::string& what, int code) {
    doc.results.push_back({{"stage", stage}, {"error", {{"type", kind}, {"message", what}}}});
    checks.add(stage + " completed", false);
    if (doc.exit_code == 0 || code == 3) doc.exit_code = code;
  };
  try {
    if (s.command == "weight-check") verdicts = weight_check(s, doc, checks);
    else if (s.command == "mu-eval") verdicts = mu_eval(s, doc, checks);
    else if (s.command == "surface-build") verdicts = surface_build(s, doc, checks);
    else if (s.command == "verify") verdicts = verify_cmd(s, doc, checks);
    else if (s.command == "example") verdicts = example_cmd(s, doc, checks);
    else throw UsageError("unknown command '" + s.command + "'");
  } catch (const UsageError&) {
    throw;
  } catch (const AccuracyError& e) {
    fail("accuracy", e.what(), 3);
  } catch (const BracketError& e) {
    fail("bracket", e.what(), 3);
  } catch (const InvariantViolation& e) {
    fail("invariant", e.what(), 1);
  } catch (const InputRejection& e) {
    fail("input_rejected", e.what(), 1);
  } catch (const MonotonicityError& e) {
    fail("monotonicity", e.what(), 1);
  } catch (const ConstructionError& e) {
    fail("construction", e.what(), 1);
  } catch (const DomainError& e) {
    fail("domain", e.what(), 1);
  }
  if (!checks.all && doc.exit_code == 0) doc.exit_code = 1;
  doc.summary["pass"] = checks.all;
  doc.summary["checks"] = checks.list;
  if (!verdicts.empty()) doc.summary["verdicts"] = verdicts;
  return doc;
}

}  // namespace cartwright::cli

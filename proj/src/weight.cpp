#include "cartwright/weight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cartwright/errors.hpp"
#include "cartwright/quadrature.hpp"

namespace cartwright::weights {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

void check_y(double y) {
  if (!(y > 0.0 && y <= 1.0 + 1e-12)) throw DomainError("weight: y outside (0, 1]");
}

// Relative step for derivatives of user-supplied functions.
constexpr double kStep = 1e-5;
constexpr double kOuterStep = 1e-3;

double central(const std::function<double(double)>& f, double y, double h) {
  return (f(y + h) - f(y - h)) / (2.0 * h);
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::power: return "power";
    case Family::power_log: return "power_log";
    case Family::exp_inv: return "exp_inv";
    case Family::threshold: return "threshold";
    case Family::theorem2: return "theorem2";
    case Family::shifted_power: return "shifted_power";
    case Family::patched: return "patched";
    case Family::user: return "user";
  }
  return "unknown";
}

Weight::Weight(Family f, std::map<std::string, double> params, std::shared_ptr<const Impl> impl,
               double normalization)
    : family_(f), params_(std::move(params)), impl_(std::move(impl)), normalization_(normalization) {}

Weight Weight::power(double p) {
  if (!(p > 0.0 && std::isfinite(p))) throw DomainError("power weight: p must be positive");
  auto impl = std::make_shared<Impl>();
  impl->log_w = [p](double y) { return -p * std::log(y); };
  impl->log_slope = [p](double y) { return -p / y; };
  impl->ratio_slope = [p](double) { return -1.0 / p; };
  return Weight(Family::power, {{"p", p}}, impl, 1.0);
}

Weight Weight::power_log(double p, double q) {
  if (!(p > 0.0 && q >= 0.0)) throw DomainError("power_log weight: need p > 0, q >= 0");
  auto impl = std::make_shared<Impl>();
  impl->log_w = [p, q](double y) {
    const double L = -std::log(y);
    return p * L + q * std::log1p(L);
  };
  impl->log_slope = [p, q](double y) {
    const double L = -std::log(y);
    return -(p + q / (1.0 + L)) / y;
  };
  impl->ratio_slope = [p, q](double y) {
    const double L = -std::log(y);
    const double g = p + q / (1.0 + L);
    return -1.0 / g + q / ((1.0 + L) * (1.0 + L) * g * g);
  };
  return Weight(Family::power_log, {{"p", p}, {"q", q}}, impl, 1.0);
}

Weight Weight::exp_inv(double a) {
  if (!(a > 0.0)) throw DomainError("exp_inv weight: a must be positive");
  auto impl = std::make_shared<Impl>();
  impl->log_w = [a](double y) { return a / y - a; };
  impl->log_slope = [a](double y) { return -a / (y * y); };
  impl->ratio_slope = [a](double y) { return -2.0 * y / a; };
  return Weight(Family::exp_inv, {{"a", a}}, impl, std::exp(-a));
}

Weight Weight::threshold(ball::Dimension n) {
  Weight w = power(n.value());
  w.family_ = Family::threshold;
  w.params_ = {{"n", static_cast<double>(n.value())}};
  return w;
}

Weight Weight::theorem2(ball::Dimension n) {
  const int k = n.value();
  auto impl = std::make_shared<Impl>();
  impl->log_w = [k](double y) {
    const double L = -std::log(y);
    return k * L + std::log1p(ipow(L, k + 1));
  };
  auto g = [k](double L) { return k + (k + 1) * ipow(L, k) / (1.0 + ipow(L, k + 1)); };
  impl->log_slope = [g](double y) { return -g(-std::log(y)) / y; };
  impl->ratio_slope = [k, g](double y) {
    const double L = -std::log(y);
    const double den = 1.0 + ipow(L, k + 1);
    const double dg = (k + 1) * ipow(L, k - 1) * (k - ipow(L, k + 1)) / (den * den);
    const double gv = g(L);
    return -1.0 / gv - dg / (gv * gv);
  };
  return Weight(Family::theorem2, {{"n", static_cast<double>(k)}}, impl, 1.0);
}

Weight Weight::shifted_power(double c, double b, double s) {
  if (!(c > 0.0 && s < 0.0)) throw DomainError("shifted_power weight: need c > 0 and s < 0");
  // y + b must stay positive on (0, 1].
  if (!(b >= 0.0 && std::isfinite(b))) throw DomainError("shifted_power weight: need b >= 0");
  auto impl = std::make_shared<Impl>();
  const double log1b = std::log1p(b);
  impl->log_w = [b, s, log1b](double y) { return s * (std::log(y + b) - log1b); };
  impl->log_slope = [b, s](double y) { return s / (y + b); };
  impl->ratio_slope = [s](double) { return 1.0 / s; };
  return Weight(Family::shifted_power, {{"c", c}, {"b", b}, {"s", s}}, impl,
                1.0 / (c * std::pow(1.0 + b, s)));
}

Weight Weight::from_functions(std::function<double(double)> w, std::function<double(double)> dw,
                              std::function<double(double)> d2w, std::string label) {
  if (!w) throw DomainError("user weight: missing w");
  const double w1 = w(1.0);
  if (!(w1 > 0.0 && std::isfinite(w1))) throw DomainError("user weight: w(1) must be positive");
  const double log_w1 = std::log(w1);
  auto impl = std::make_shared<Impl>();
  auto log_w = [w, log_w1](double y) { return std::log(w(y)) - log_w1; };
  impl->log_w = log_w;
  if (dw) {
    impl->log_slope = [w, dw](double y) { return dw(y) / w(y); };
  } else {
    impl->log_slope = [log_w](double y) { return central(log_w, y, y * kStep); };
  }
  if (d2w && dw) {
    impl->ratio_slope = [w, dw, d2w](double y) {
      const double d = dw(y);
      return 1.0 - w(y) * d2w(y) / (d * d);
    };
  } else {
    auto ls = impl->log_slope;
    const double step = dw ? kStep : kOuterStep;
    impl->ratio_slope = [ls, step](double y) {
      auto h = [&ls](double x) { return 1.0 / ls(x); };
      const double r1 = central(h, y, y * step);
      const double r2 = central(h, y, 2.0 * y * step);
      if (!std::isfinite(r1) || std::abs(r1 - r2) > 1e-4 * std::max(1.0, std::abs(r1))) {
        throw AccuracyError("user weight: unstable finite-difference (w/w')'", r1, r2);
      }
      return r1;
    };
  }
  Weight out(Family::user, {}, impl, 1.0 / w1);
  out.label_ = std::move(label);
  return out;
}

double Weight::log_value(double y) const {
  check_y(y);
  return impl_->log_w(std::min(y, 1.0));
}

double Weight::operator()(double y) const { return std::exp(log_value(y)); }

double Weight::log_slope(double y) const {
  check_y(y);
  return impl_->log_slope(std::min(y, 1.0));
}

double Weight::derivative(double y) const { return (*this)(y)*log_slope(y); }

double Weight::ratio_slope(double y) const {
  check_y(y);
  return impl_->ratio_slope(std::min(y, 1.0));
}

double Weight::psi_prime(double t) const {
  const double y = std::exp(-t);
  return -y * impl_->log_slope(y);
}

double Weight::psi_second(double t) const {
  // psi'' = -psi' (1 + psi' (w/w')').
  const double m = psi_prime(t);
  return -m * (1.0 + m * impl_->ratio_slope(std::exp(-t)));
}

std::string Weight::describe() const {
  std::ostringstream os;
  os << "family=" << (family_ == Family::user ? label_ : family_name(family_));
  for (const auto& [k, v] : params_) os << ' ' << k << '=' << v;
  return os.str();
}

std::vector<double> default_grid(int points, double lo, double hi) {
  if (points < 2 || !(lo > 0.0 && lo < hi && hi <= 1.0)) {
    throw DomainError("default_grid: need points >= 2 and 0 < lo < hi <= 1");
  }
  std::vector<double> g(points);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < points; ++i) g[i] = std::exp(a + (b - a) * i / (points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

double alpha(const Weight& w, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("alpha: theta outside (0, 1)");
  const double slope = w.log_slope(theta);
  if (!(slope < 0.0)) throw MonotonicityError("alpha: weight not decreasing at theta", theta);
  return -1.0 / (10.0 * slope);
}

RipponIntegral rippon_integral(ball::Dimension n, const Weight& w) {
  const double inv = 1.0 / (n.value() + 1);
  numerics::QuadConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-14;
  const auto r = numerics::integrate_graded_at_zero(
      [&](double t) { return std::exp((w.log_value(t) - std::log(t)) * inv); }, 1.0, cfg);
  return {r.value, r.divergent};
}

std::string borichev_name(BorichevClass c) {
  switch (c) {
    case BorichevClass::polynomial: return "polynomial";
    case BorichevClass::rapid: return "rapid";
    case BorichevClass::neither: return "neither";
  }
  return "neither";
}

namespace {

void classify_borichev(ball::Dimension n, const Weight& w, RegularityReport& rep) {
  // Rapid: psi' -> inf with |psi''| = O(psi'^(2 - eps)), by a log-log fit.
  const int samples = 41;
  std::vector<double> lx, ly;
  for (int i = 0; i < samples; ++i) {
    const double t = 5.0 + 20.0 * i / (samples - 1);
    const double p1 = w.psi_prime(t);
    const double p2 = std::abs(w.psi_second(t));
    if (p1 > 0.0 && p2 > 0.0 && std::isfinite(p1) && std::isfinite(p2)) {
      lx.push_back(std::log(p1));
      ly.push_back(std::log(p2));
    }
  }
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (lx.size() >= 10) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx > 1e-12) slope = sxy / sxx;
  }
  rep.borichev_fit_slope = slope;
  const double p5 = w.psi_prime(5.0), p25 = w.psi_prime(25.0), p50 = w.psi_prime(50.0);
  // psi' - L decays like 1/t for the log-corrected families: one Richardson step.
  rep.borichev_limit = 2.0 * p50 - p25;
  const bool growing = p25 > 10.0 * p5 && p50 > p25;
  if (growing && std::isfinite(slope) && slope <= 2.0 - 0.05) {
    rep.borichev = BorichevClass::rapid;
    rep.borichev_limit = std::numeric_limits<double>::infinity();
    return;
  }
  if (growing) return;
  // Polynomial: finite limit above n and psi' of bounded variation, read
  // off as a variation on [25, 50] that is small next to that on [0, 25].
  auto variation = [&](double a, double b) {
    double tv = 0.0, prev = w.psi_prime(a);
    for (int i = 1; i <= 400; ++i) {
      const double cur = w.psi_prime(a + (b - a) * i / 400);
      tv += std::abs(cur - prev);
      prev = cur;
    }
    return tv;
  };
  const double tv_head = variation(0.0, 25.0), tv_tail = variation(25.0, 50.0);
  const bool bv = tv_tail <= 0.5 * tv_head + 1e-9;
  if (std::isfinite(rep.borichev_limit) && rep.borichev_limit - n.value() > 0.01 && bv) {
    rep.borichev = BorichevClass::polynomial;
  }
}

}  // namespace

RegularityReport check_conditions(ball::Dimension n, const Weight& w,
                                  const std::vector<double>& grid) {
  if (grid.size() < 50) throw DomainError("check_conditions: grid needs at least 50 points");
  if (!std::is_sorted(grid.begin(), grid.end()) || !(grid.front() > 0.0) || grid.back() > 1.0) {
    throw DomainError("check_conditions: grid must be increasing inside (0, 1]");
  }
  RegularityReport rep;
  rep.grid = grid;
  const int dim = n.value();

  std::vector<double> slope(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    slope[i] = w.log_slope(grid[i]);
    if (!(slope[i] < 0.0)) throw MonotonicityError("check_conditions: weight not decreasing", grid[i]);
  }

  // w/w' -> 0: sup over the lowest decade, shrinking toward 0.
  const double decade = 10.0 * grid.front();
  rep.als_sup = 0.0;
  bool shrinking = true;
  double prev = -1.0;
  for (std::size_t i = 0; i < grid.size() && grid[i] <= decade; ++i) {
    const double r = std::abs(1.0 / slope[i]);
    rep.als_sup = std::max(rep.als_sup, r);
    if (prev >= 0.0 && r < prev) shrinking = false;
    prev = r;
  }
  rep.als_pass = rep.als_sup < 1e-3 && shrinking;

  rep.ratio_slope_samples.resize(grid.size());
  rep.min_ratio_slope = std::numeric_limits<double>::infinity();
  double min_near0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = w.ratio_slope(grid[i]);
    rep.ratio_slope_samples[i] = r;
    if (r < rep.min_ratio_slope) {
      rep.min_ratio_slope = r;
      rep.argmin_ratio_slope = grid[i];
    }
    if (grid[i] <= rep.near0_y0) min_near0 = std::min(min_near0, r);
  }
  auto to_delta = [dim](double m) { return std::clamp(1.0 + dim * m, 0.0, 1.0); };
  rep.ar_delta = to_delta(rep.min_ratio_slope);
  rep.ar_delta_near0 = std::isfinite(min_near0) ? to_delta(min_near0) : rep.ar_delta;

  // Polynomial growth: m(y) = -y w'/w bounded above and below by n + eps.
  double m_lo = std::numeric_limits<double>::infinity(), m_hi = 0.0;
  double m_bottom = 0.0, m_next = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double m = -grid[i] * slope[i];
    m_lo = std::min(m_lo, m);
    m_hi = std::max(m_hi, m);
    if (grid[i] <= decade) m_bottom = std::max(m_bottom, m);
    if (grid[i] > decade && grid[i] <= 10.0 * decade) m_next = std::max(m_next, m);
  }
  if (m_next > 0.0 && m_bottom < 2.0 * m_next) {
    rep.poly_growth = PolyGrowth{m_hi, m_lo - dim, m_lo - dim > 0.0};
  }

  rep.rippon = rippon_integral(n, w);
  classify_borichev(n, w, rep);
  return rep;
}

DoublingCheck verify_lemma_doubling(const Weight& w, double theta) {
  if (!(theta > 0.0 && theta <= 0.5)) throw DomainError("lemma doubling: theta outside (0, 1/2]");
  DoublingCheck out;
  out.alpha = alpha(w, theta);
  const double left = theta - 2.0 * out.alpha;
  if (!(left > 0.0)) throw DomainError("lemma doubling: theta - 2 alpha <= 0");
  out.pass_quarter = out.alpha <= theta / 4.0;
  out.ratio = std::exp(w.log_value(left) - w.log_value(theta));
  out.pass_doubling = out.ratio <= 2.0;
  return out;
}

WeightedIntegralCheck verify_weighted_integral_bound(ball::Dimension n, const Weight& w,
                                                     double theta, double delta) {
  if (!(theta > 0.0 && theta <= 0.5)) throw DomainError("weighted integral: theta outside (0, 1/2]");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("weighted integral: delta outside (0, 1]");
  const int dim = n.value();
  const double inv = 1.0 / (dim + 1);
  const double log_wt = w.log_value(theta);
  numerics::QuadConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 0.0;
  auto f = [&](double y) {
    return std::exp((w.log_value(y * (1.0 - theta) + theta) - log_wt - std::log(y)) * inv);
  };
  // Below y ~ theta the integrand is close to (1/y)^(1/(n+1)); above it the
  // weight takes over. Only the first part is singular.
  const double cut = std::min(0.01 * theta, 0.5);
  const auto near = numerics::integrate_graded_at_zero(f, cut, cfg);
  if (near.divergent) throw AccuracyError("weighted integral: quadrature diverged");
  const auto far = numerics::integrate(f, numerics::graded_breakpoints(cut, 1.0, cut, cut), cfg);
  const double total = near.value + far.value;
  WeightedIntegralCheck out;
  const double a = alpha(w, theta);
  out.lhs_normalized = total;
  out.rhs_normalized =
      ((dim + 1.0) / dim + 40.0 * (dim + 1.0) / delta) * std::pow(a, dim * inv);
  const double scale = std::exp(log_wt * inv);
  out.lhs = out.lhs_normalized * scale;
  out.rhs = out.rhs_normalized * scale;
  out.pass = out.lhs_normalized <= out.rhs_normalized;
  return out;
}

Weight patch_weight(const Weight& w, double y0) {
  if (!(y0 > 0.0 && y0 <= 1.0)) throw DomainError("patch_weight: y0 outside (0, 1]");
  double y1 = y0;
  double h1 = w.ratio_slope(y1);
  while (!(h1 < 0.0)) {
    y1 *= 0.99;
    if (y1 < 1e-6) throw ConstructionError("patch_weight: (w/w')' >= 0 on the whole search range");
    h1 = w.ratio_slope(y1);
  }
  const double l1 = w.log_slope(y1);
  if (!(l1 < 0.0)) throw ConstructionError("patch_weight: weight not decreasing at y1");
  const double s = 1.0 / h1;
  const double b = s / l1 - y1;  // y1 + b = s / l1 > 0
  const double log1b = std::log1p(b);
  const double log_tail_y1 = s * (std::log(y1 + b) - log1b);
  const double log_A = log_tail_y1 - w.log_value(y1);
  if (!std::isfinite(log_A) || !std::isfinite(b)) {
    throw ConstructionError("patch_weight: singular matching system");
  }
  auto base = w.impl_;
  auto impl = std::make_shared<Weight::Impl>();
  impl->log_w = [=](double y) {
    return y <= y1 ? log_A + base->log_w(y) : s * (std::log(y + b) - log1b);
  };
  impl->log_slope = [=](double y) { return y <= y1 ? base->log_slope(y) : s / (y + b); };
  impl->ratio_slope = [=](double y) { return y <= y1 ? base->ratio_slope(y) : 1.0 / s; };
  std::map<std::string, double> params = w.parameters();
  params["patch_y1"] = y1;
  params["patch_s"] = s;
  params["patch_b"] = b;
  params["patch_c"] = std::exp(-s * log1b);
  Weight out(Family::patched, params, impl, w.normalization() * std::exp(log_A));
  out.patch_point_ = y1;
  return out;
}

namespace {

double require_param(const std::map<std::string, std::string>& kv, const std::string& key,
                     const std::string& spec) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw UsageError("weight spec '" + spec + "': missing " + key + "=");
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("weight spec: bad number in " + key + "=" + it->second);
  }
}

}  // namespace

Weight parse_weight_spec(const std::string& spec, ball::Dimension n) {
  std::map<std::string, std::string> kv;
  std::istringstream is(spec);
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size()) {
      throw UsageError("weight spec: malformed token '" + tok + "'");
    }
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  const auto fam = kv.find("family");
  if (fam == kv.end()) throw UsageError("weight spec '" + spec + "': missing family=");
  const std::string f = fam->second;
  std::vector<std::string> allowed{"family", "patch"};
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) allowed.emplace_back(k);
  };
  std::optional<Weight> w;
  if (f == "power") {
    allow({"p"});
    w = Weight::power(require_param(kv, "p", spec));
  } else if (f == "power_log") {
    allow({"p", "q"});
    w = Weight::power_log(require_param(kv, "p", spec), require_param(kv, "q", spec));
  } else if (f == "exp_inv") {
    allow({"a"});
    w = Weight::exp_inv(require_param(kv, "a", spec));
  } else if (f == "threshold") {
    w = Weight::threshold(n);
  } else if (f == "theorem2") {
    w = Weight::theorem2(n);
  } else if (f == "shifted_power") {
    allow({"c", "b", "s"});
    w = Weight::shifted_power(require_param(kv, "c", spec), require_param(kv, "b", spec),
                              require_param(kv, "s", spec));
  } else {
    throw UsageError("weight spec: unknown family '" + f + "'");
  }
  for (const auto& [k, v] : kv) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw UsageError("weight spec: unexpected token '" + k + "=" + v + "'");
    }
  }
  if (kv.count("patch")) return patch_weight(*w, require_param(kv, "patch", spec));
  return *w;
}

}  // namespace cartwright::weights

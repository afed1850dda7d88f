#include "cartwright/extremal_example.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "cartwright/errors.hpp"

namespace cartwright::extremal {

namespace {

constexpr double kPi = std::numbers::pi;

double horner(const std::vector<double>& c, double u) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * u + *it;
  return s;
}

double horner_d(const std::vector<double>& c, double u) {
  double s = 0.0;
  for (std::size_t j = c.size() - 1; j >= 1; --j) s = s * u + double(j) * c[j];
  return s;
}

// u^(n/2) * d f2 / du from the series, finite at u = 0.
double du_scaled(const FrobeniusSeries& fs, double u) {
  const double half = 0.5 * fs.n;
  const double rho2 = 1.0 - half;
  double v = rho2 * horner(fs.c, u) + u * horner_d(fs.c, u);
  if (fs.A != 0.0) v += fs.A * (-std::pow(u, half) * std::log(u) + (1.0 - u) * std::pow(u, half - 1.0));
  return v;
}

// Least-squares slope; NaN with fewer than two points.
double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

double FrobeniusSeries::value(double u) const {
  double v = std::pow(u, 1.0 - 0.5 * n) * horner(c, u);
  if (A != 0.0) v += A * (1.0 - u) * std::log(u);
  return v;
}

double FrobeniusSeries::du(double u) const {
  const double rho2 = 1.0 - 0.5 * n;
  double v = rho2 * std::pow(u, rho2 - 1.0) * horner(c, u) + std::pow(u, rho2) * horner_d(c, u);
  if (A != 0.0) v += A * (-std::log(u) + (1.0 - u) / u);
  return v;
}

double FrobeniusSeries::regular(double u) const {
  double v = horner(c, u);
  if (A != 0.0) v += A * (1.0 - u) * std::pow(u, 0.5 * n - 1.0) * std::log(u);
  return v;
}

FrobeniusSeries frobenius_series(int n, int order) {
  if (n < 2) throw DomainError("frobenius_series: needs n >= 2");
  if (order < 4) throw DomainError("frobenius_series: order too small");
  const double rho2 = 1.0 - 0.5 * n;
  auto P = [n](double s) { return s * (2.0 * s - 2.0 + n); };
  auto Q = [n](double s) { return (s + n) * (s - 1.0); };
  // L[(1-u) log u] = (n-2)/u - (2n+1) + (n+1) u
  const double h[3] = {double(n - 2), -(2.0 * n + 1.0), double(n + 1)};
  FrobeniusSeries fs;
  fs.n = n;
  fs.c.assign(order + 1, 0.0);
  const bool even = n % 2 == 0;
  const int M = n / 2 - 1;
  if (!even) {
    fs.c[0] = 1.0;
  } else if (n == 2) {
    fs.A = 1.0;
  } else {
    fs.c[0] = 1.0;
  }
  for (int m = 1; m <= order; ++m) {
    if (even && m == M) {
      // Indicial gap: c_M is free, the log coefficient is forced.
      fs.A = fs.c[m - 1] * Q(-1.0) / h[0];
      fs.c[m] = 0.0;
      continue;
    }
    double rhs = fs.c[m - 1] * Q(m - 1 + rho2);
    if (even && m - M >= 0 && m - M <= 2) rhs -= fs.A * h[m - M];
    fs.c[m] = rhs / P(m + rho2);
  }
  const double prev = fs.c[order - 1];
  fs.tail_ratio = prev != 0.0 ? std::abs(fs.c[order] / prev) : 0.0;
  return fs;
}

double HomogeneousSolutions::f2(double t) const {
  const double u = 1.0 - t;
  return u <= u0_ ? series_.value(u) : f2_(t);
}

double HomogeneousSolutions::f2_prime(double t) const {
  const double u = 1.0 - t;
  return u <= u0_ ? -series_.du(u) : df2_(t);
}

double HomogeneousSolutions::f2_regular(double t) const {
  const double u = 1.0 - t;
  return u <= u0_ ? series_.regular(u) : f2_(t) * std::pow(u, 0.5 * n_ - 1.0);
}

double HomogeneousSolutions::g(double t) const {
  const double u = 1.0 - t;
  if (u <= u0_) {
    // t f2' u^(n/2) - f2 u^(n/2)
    return -t * du_scaled(series_, u) - u * series_.regular(u);
  }
  return (t * df2_(t) - f2_(t)) * std::pow(u, 0.5 * n_);
}

HomogeneousSolutions homogeneous_solutions(int n, const HomogeneousConfig& cfg) {
  if (n < 2) throw DomainError("homogeneous_solutions: needs n >= 2");
  if (!(cfg.glue_u > 0.0 && cfg.glue_u < 0.25)) throw DomainError("homogeneous_solutions: glue radius outside (0, 1/4)");
  HomogeneousSolutions hs;
  hs.n_ = n;
  hs.u0_ = cfg.glue_u;
  hs.series_ = frobenius_series(n, cfg.series_order);
  const auto& fs = hs.series_;
  const double u0 = cfg.glue_u;
  const int N = cfg.series_order;
  const double sum = std::abs(horner(fs.c, u0)) + std::abs(fs.A);
  const double q = fs.tail_ratio * u0;
  const double tail = q < 1.0 ? std::abs(fs.c[N]) * std::pow(u0, N) / (1.0 - q)
                              : std::numeric_limits<double>::infinity();
  if (!(tail <= 1e-15 * std::max(1.0, sum))) {
    throw AccuracyError("frobenius series: tail too large at the glue point", tail, sum);
  }

  std::vector<double> edges{0.0, 0.25, 0.5};
  for (double u = 0.25; u > 2.0 * u0; u *= 0.5) edges.push_back(1.0 - u);
  edges.push_back(1.0 - u0);
  const auto nodes = numerics::PiecewiseChebyshev::nodes(edges, cfg.cheb_order);

  // Integrate in u = 1 - t away from the singular point.
  std::vector<std::size_t> idx(nodes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return nodes[a] > nodes[b]; });
  std::vector<double> times{u0};
  for (std::size_t i : idx) times.push_back(1.0 - nodes[i]);

  using State = std::array<double, 2>;
  auto sys = [n](const State& x, State& dx, double u) {
    dx[0] = x[1];
    dx[1] = -(n * (1.0 - u) * x[1] + n * x[0]) / (u * (2.0 - u));
  };
  State x{fs.value(u0), fs.du(u0)};
  std::vector<double> f2v(nodes.size()), df2v(nodes.size());
  std::size_t seen = 0;
  auto obs = [&](const State& s, double) {
    if (seen > 0) {
      f2v[idx[seen - 1]] = s[0];
      df2v[idx[seen - 1]] = -s[1];
    }
    ++seen;
  };
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(1e-15, 1e-14, ode::runge_kutta_dopri5<State>());
  ode::integrate_times(stepper, sys, x, times.begin(), times.end(), 1e-6, obs);
  if (seen != times.size()) throw AccuracyError("homogeneous_solutions: integration stopped early");
  hs.f2_ = numerics::PiecewiseChebyshev(edges, cfg.cheb_order, f2v);
  hs.df2_ = numerics::PiecewiseChebyshev(edges, cfg.cheb_order, df2v);

  double gmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000; ++i) {
    const double t = i <= 1000 ? 0.999 * i / 1000.0 : 1.0 - 1e-3 * std::pow(1e-12, (i - 1000) / 1000.0);
    gmin = std::min(gmin, std::abs(hs.g(t)));
  }
  hs.g_min_ = gmin;
  if (!(gmin > 0.0)) throw ConstructionError("homogeneous_solutions: Wronskian factor g vanishes");
  return hs;
}

BoundedSolution BoundedSolution::linear(double slope) {
  BoundedSolution b;
  b.lin_ = slope;
  return b;
}

double BoundedSolution::operator()(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("cascade function: t outside [0, 1]");
  double v = lin_ * t;
  if (!homs_) return v;
  v -= t * F_(t);
  if (t < 1.0) v -= homs_->f2(t) * I_(t);
  return v;
}

double BoundedSolution::derivative(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("cascade function: t outside [0, 1]");
  if (!homs_) return lin_;
  const double s = std::min(t, std::nextafter(1.0, 0.0));
  return lin_ - F_(s) - homs_->f2_prime(s) * I_(s);
}

double BoundedSolution::second_derivative(double t) const {
  if (!(t >= 0.0 && t < 1.0)) throw DomainError("cascade function: t outside [0, 1)");
  if (!homs_) return 0.0;
  const int n = homs_->n();
  return (r_(t) + n * t * derivative(t) - n * (*this)(t)) / (1.0 - t * t);
}

std::vector<double> cascade_edges() {
  std::vector<double> e{0.0, 0.125, 0.25, 0.375, 0.5};
  for (int j = 1; j <= 46; ++j) e.push_back(1.0 - std::ldexp(0.5, -j));
  e.push_back(1.0);
  return e;
}

BoundedSolution solve_inhomogeneous(int n, std::function<double(double)> r,
                                    std::shared_ptr<const HomogeneousSolutions> homs) {
  if (!homs || homs->n() != n) throw DomainError("solve_inhomogeneous: homogeneous solutions for another n");
  constexpr int order = 20;
  const auto edges = cascade_edges();
  const auto nodes = numerics::PiecewiseChebyshev::nodes(edges, order);
  std::vector<double> a(nodes.size()), b(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    // nodes on the last panels round to 1 in double
    const double s = std::min(nodes[i], std::nextafter(1.0, 0.0));
    const double rs = r(s);
    const double den = homs->g(s) * (1.0 + s);
    a[i] = rs * homs->f2_regular(s) / den;
    b[i] = s * rs * std::pow(1.0 - s, 0.5 * n - 1.0) / den;
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw AccuracyError("solve_inhomogeneous: non-finite integrand at s = " + std::to_string(s));
    }
  }
  BoundedSolution out;
  out.homs_ = std::move(homs);
  out.r_ = std::move(r);
  out.F_ = numerics::PiecewiseChebyshev(edges, order, a).integral_from_left();
  out.I_ = numerics::PiecewiseChebyshev(edges, order, b).integral_to_right();
  return out;
}

double LogPolySolution::poly(double t, double L) const {
  double s = 0.0;
  for (int k = n + 1; k >= 0; --k) s = s * L + f[k](t);
  return s;
}

LogPolySolution build_cascade(int n, const HomogeneousConfig& cfg) {
  if (n < 2) throw DomainError("build_cascade: needs n >= 2");
  LogPolySolution sol;
  sol.n = n;
  sol.homs = std::make_shared<const HomogeneousSolutions>(homogeneous_solutions(n, cfg));
  sol.f.assign(n + 2, BoundedSolution::linear(0.0));
  sol.f[n + 1] = BoundedSolution::linear(-1.0);
  for (int k = n; k >= 0; --k) {
    const BoundedSolution f1 = sol.f[k + 1];
    const BoundedSolution f2 = k + 2 <= n + 1 ? sol.f[k + 2] : BoundedSolution::linear(0.0);
    auto r = [f1, f2, n, k](double t) { return -(k + 1.0) * ((n + 1.0) * f1(t) + (k + 2.0) * f2(t)); };
    try {
      sol.f[k] = solve_inhomogeneous(n, r, sol.homs);
    } catch (const AccuracyError& e) {
      throw AccuracyError("cascade k = " + std::to_string(k) + ": " + e.what(), e.last_estimate(),
                          e.previous_estimate());
    }
  }
  return sol;
}

double assemble_V(const LogPolySolution& s, double rho, double phi) {
  if (!(rho > 0.0 && rho <= 2.0)) throw DomainError("assemble_V: rho outside (0, 2]");
  const double t = std::cos(phi);
  if (!(t >= 0.0)) throw DomainError("assemble_V: cos phi < 0");
  return std::pow(rho, -s.n) * s.poly(std::min(t, 1.0), -std::log(rho));
}

double pde_residual(const LogPolySolution& s, double rho, double phi, double h) {
  const int n = s.n;
  auto V = [&](double ls, double ph) { return assemble_V(s, std::exp(ls), ph); };
  const double l0 = std::log(rho);
  const double v0 = V(l0, phi);
  const double vsp = V(l0 + h, phi), vsm = V(l0 - h, phi);
  const double vpp = V(l0, phi + h), vpm = V(l0, phi - h);
  const double Vss = (vsp - 2.0 * v0 + vsm) / (h * h);
  const double Vs = (vsp - vsm) / (2.0 * h);
  const double Vpp = (vpp - 2.0 * v0 + vpm) / (h * h);
  const double cot_term = phi == 0.0 ? Vpp : (vpp - vpm) / (2.0 * h) / std::tan(phi);
  const double R = Vss + (n - 1) * Vs + Vpp + (n - 1) * cot_term;
  const double E = std::pow(rho, -n) * std::pow(1.0 + std::abs(std::log(rho)), n + 1);
  return std::abs(R) / E;
}

ExampleRecord verify_example(const LogPolySolution& s, const ExampleGrids& g) {
  const int n = s.n;
  ExampleRecord rec;
  for (int i = 0; i < g.rho_points; ++i) {
    const double rho = g.rho_lo * std::pow(g.rho_hi / g.rho_lo, double(i) / (g.rho_points - 1));
    for (int j = 0; j < g.phi_points; ++j) {
      const double phi = g.phi_lo + (g.phi_hi - g.phi_lo) * j / (g.phi_points - 1);
      rec.pde_residual_max = std::max(rec.pde_residual_max, pde_residual(s, rho, phi, g.h));
      rec.pde_residual_max_half = std::max(rec.pde_residual_max_half, pde_residual(s, rho, phi, 0.5 * g.h));
    }
  }
  rec.convergence_ratio = rec.pde_residual_max / rec.pde_residual_max_half;
  rec.residual_pass = rec.pde_residual_max < g.residual_threshold;
  // V rho^n cos^n phi = poly(t, L) t^n
  rec.upper_C = -std::numeric_limits<double>::infinity();
  const double Lmax = -std::log(g.upper_rho_lo);
  for (int i = 0; i < g.upper_points; ++i) {
    const double L = Lmax * i / (g.upper_points - 1);
    for (int j = 0; j < g.upper_points; ++j) {
      const double t = std::pow(1e-6, 1.0 - double(j) / (g.upper_points - 1));
      rec.upper_C = std::max(rec.upper_C, s.poly(t, L) * std::pow(t, n));
      double low = 0.0;
      for (int k = n; k >= 0; --k) low = low * L + s.f[k](t);
      rec.upper_M = std::max(rec.upper_M, std::abs(low) / std::pow(std::max(1.0, L), n));
    }
  }
  rec.lower_C1 = std::numeric_limits<double>::infinity();
  std::vector<double> xs, ys;
  double lo_min = std::numeric_limits<double>::infinity(), lo_max = 0.0;
  for (int i = 0; i < g.axis_points; ++i) {
    const double t = g.axis_lo * std::pow(g.axis_hi / g.axis_lo, double(i) / (g.axis_points - 1));
    const double L = -std::log(t);
    const double neg = -s.poly(1.0, L);
    const double ratio = neg / std::pow(L, n + 1);
    rec.axis_t.push_back(t);
    rec.axis_ratio.push_back(ratio);
    rec.lower_C1 = std::min(rec.lower_C1, ratio);
    if (neg > 0.0) {
      xs.push_back(std::log(L));
      ys.push_back(std::log(neg));
    }
    if (t <= 10.0 * g.axis_lo * (1.0 + 1e-12)) {
      lo_min = std::min(lo_min, ratio);
      lo_max = std::max(lo_max, ratio);
    }
  }
  rec.last_decade_spread = lo_min > 0.0 ? lo_max / lo_min - 1.0 : std::numeric_limits<double>::infinity();
  rec.log_exponent_fit = slope(xs, ys);
  xs.clear();
  ys.clear();
  for (int i = 0; i < g.axis_points; ++i) {
    const double L = 100.0 * std::pow(10.0, double(i) / (g.axis_points - 1));
    const double neg = -s.poly(1.0, L);
    if (neg > 0.0) {
      xs.push_back(std::log(L));
      ys.push_back(std::log(neg));
    }
  }
  rec.log_exponent_fit_deep = slope(xs, ys);
  return rec;
}

namespace {

std::complex<double> one_minus_z(double x, double y) {
  if (x * x + y * y > 1.0 + 1e-12) throw DomainError("closed form: point outside the closed disc");
  const std::complex<double> w(1.0 - x, -y);
  if (w == std::complex<double>(0.0, 0.0)) throw DomainError("closed form: boundary singularity at z = 1");
  return w;
}

}  // namespace

double closed_form_n1(double x, double y) {
  const auto w = one_minus_z(x, y);
  const auto lg = std::log(w);
  return std::real(-w * lg * lg);
}

double closed_form_n1_variant(double x, double y) {
  const auto w = one_minus_z(x, y);
  const auto lg = std::log(w);
  return std::real(-lg * lg / w);
}

ClosedFormRecord verify_closed_form_n1(bool variant, int samples, std::uint64_t seed) {
  auto U = [variant](double x, double y) { return variant ? closed_form_n1_variant(x, y) : closed_form_n1(x, y); };
  ClosedFormRecord rec;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rad(0.0, 0.75), ang(0.0, 2.0 * kPi);
  const double h = 1e-3;
  for (int i = 0; i < samples; ++i) {
    const double r = rad(rng), a = ang(rng);
    const double x = r * std::cos(a), y = r * std::sin(a);
    auto d2 = [&](double dx, double dy) {
      return (-U(x + 2 * dx, y + 2 * dy) + 16.0 * U(x + dx, y + dy) - 30.0 * U(x, y) + 16.0 * U(x - dx, y - dy) -
              U(x - 2 * dx, y - 2 * dy)) /
             (12.0 * h * h);
    };
    rec.harmonic_residual_max = std::max(rec.harmonic_residual_max, std::abs(d2(h, 0.0) + d2(0.0, h)));
  }
  auto axis = [&](double d) { return -U(1.0 - d, 0.0) * d / std::pow(std::log(1.0 / d), 2); };
  rec.axis_ratio_small = axis(1e-8);
  rec.axis_ratio_mid = axis(1e-4);
  rec.upper_C = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 120; ++i) {
    const double y = std::pow(10.0, -10.0 + 10.0 * i / 120.0);
    for (int j = 0; j <= 400; ++j) {
      const double a = kPi * std::pow(10.0, -8.0 + 8.0 * j / 400.0);
      const double r = 1.0 - y;
      rec.upper_C = std::max(rec.upper_C, U(r * std::cos(a), r * std::sin(a)) * y);
    }
  }
  return rec;
}

verify::HarmonicTestFunction extremal_test_function(int n, const HomogeneousConfig& cfg) {
  using ball::BallPoint;
  std::function<double(const BallPoint&)> V;
  if (n == 1) {
    V = [](const BallPoint& p) {
      const double r = 1.0 - p.y;
      return closed_form_n1_variant(r * std::cos(p.phi), r * std::sin(p.phi));
    };
  } else {
    auto sol = std::make_shared<const LogPolySolution>(build_cascade(n, cfg));
    V = [sol, n](const BallPoint& p) {
      const double s = std::sin(0.5 * p.phi);
      const double ax = p.y + (1.0 - p.y) * 2.0 * s * s;  // 1 - x
      const double ay = (1.0 - p.y) * std::sin(p.phi);
      const double rho = std::hypot(ax, ay);
      if (rho == 0.0) throw DomainError("extremal: evaluated at the singular boundary point");
      return std::pow(rho, -n) * sol->poly(std::min(1.0, ax / rho), -std::log(rho));
    };
  }
  const double v0 = V(BallPoint(0.0, 1.0));
  double m = 0.0;
  for (int i = 0; i <= 150; ++i) {
    const double y = std::pow(10.0, -9.0 + 9.0 * i / 150.0);
    for (int j = 0; j <= 200; ++j) {
      const double phi = j == 0 ? 0.0 : kPi * std::pow(10.0, -6.0 + 6.0 * (j - 1) / 199.0);
      m = std::max(m, (V(BallPoint(phi, y)) - v0) * std::pow(y, n));
    }
  }
  if (!(m > 0.0 && std::isfinite(m))) throw ConstructionError("extremal: envelope fit failed");
  const double c = 1.1 * m;
  auto U = [V, v0, c](const BallPoint& p) { return (V(p) - v0) / c; };
  return verify::HarmonicTestFunction{
      ball::AxialBoundaryProfile::from_function([U](double t) { return U(BallPoint(t, 0.0)); }, {1e-3, 1e-2, 0.1}),
      U, weights::Weight::threshold(ball::Dimension(n)), "extremal(n=" + std::to_string(n) + ")"};
}

}  // namespace cartwright::extremal

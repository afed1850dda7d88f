#include "cartwright/bound_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "cartwright/errors.hpp"

namespace cartwright::verify {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// exp(a - b) without forming either exponential.
double exp_diff(double a, double b) { return std::exp(a - b); }

}  // namespace

HarmonicTestFunction make_poisson_test(ball::Dimension n, double pole_angle, double y0,
                                       const weights::Weight& w) {
  if (!(y0 > 0.0 && y0 < 1.0)) throw DomainError("make_poisson_test: depth outside (0, 1)");
  if (pole_angle != 0.0 && pole_angle != kPi) {
    throw DomainError("make_poisson_test: pole must sit on the axis (angle 0 or pi)");
  }
  const bool south = pole_angle == 0.0;
  auto raw = [n, y0, south](double phi, double y) {
    const double yp = 1.0 - (1.0 - y0) * (1.0 - y);
    return ball::poisson_kernel(n, yp, south ? phi : kPi - phi) - 1.0;
  };
  double m = 0.0;
  for (double y : weights::default_grid(400, 1e-10, 1.0)) {
    m = std::max(m, raw(pole_angle, y) * std::exp(-w.log_value(y)));
  }
  const double scale = m > 0.0 ? 1.0 / (1.1 * m) : 1.0;
  std::vector<double> knots;
  for (double d : {y0, 4.0 * y0, 16.0 * y0}) {
    const double k = south ? d : kPi - d;
    if (k > 0.0 && k < kPi) knots.push_back(k);
  }
  HarmonicTestFunction out{
      ball::AxialBoundaryProfile::from_function([raw, scale](double t) { return scale * raw(t, 0.0); },
                                                knots),
      [raw, scale](const ball::BallPoint& p) { return scale * raw(p.phi, p.y); }, w,
      "poisson(pole=" + fmt(pole_angle) + ", y0=" + fmt(y0) + ")"};
  return out;
}

HarmonicTestFunction dilate(const HarmonicTestFunction& u, double theta, double divisor) {
  if (!(theta >= 0.0 && theta < 1.0)) throw DomainError("dilate: theta outside [0, 1)");
  auto ev = u.evaluator;
  auto f = [ev, theta, divisor](const ball::BallPoint& p) {
    return ev(ball::BallPoint(p.phi, 1.0 - (1.0 - theta) * (1.0 - p.y))) / divisor;
  };
  auto prof = [ev, theta, divisor](double t) { return ev(ball::BallPoint(t, theta)) / divisor; };
  return HarmonicTestFunction{ball::AxialBoundaryProfile::from_function(prof, u.profile.knots()), f,
                              u.envelope, u.provenance + " dilated by " + fmt(theta)};
}

std::pair<PointFn, PointFn> split_extension(ball::Dimension n, const ball::AxialBoundaryProfile& profile,
                                            double beta, const numerics::QuadConfig& cfg) {
  if (!(beta > 0.0 && beta <= kPi / 2)) throw DomainError("split_extension: beta outside (0, pi/2]");
  PointFn inner = [n, profile, beta, cfg](const ball::BallPoint& p) {
    return ball::harmonic_extension_axial(n, profile, p, cfg, 0.0, beta);
  };
  PointFn outer = [n, profile, beta, cfg](const ball::BallPoint& p) {
    return ball::harmonic_extension_axial(n, profile, p, cfg, beta, kPi);
  };
  return {inner, outer};
}

CapBoundRecord verify_cap_average_bound(ball::Dimension n, const surface::Fn& k_tilde,
                                        const HarmonicTestFunction& u_tilde, double beta,
                                        const CapBoundConfig& cfg, const surface::Fn& dk_tilde) {
  if (!(beta > 0.0 && beta <= kPi / 2)) throw DomainError("cap bound: beta outside (0, pi/2]");
  // u~ <= k~ on a grid of depths and angles.
  std::vector<double> ys{0.0};
  for (double y : weights::default_grid(60, 1e-6, 1.0)) ys.push_back(y);
  std::vector<double> angles;
  for (int i = 0; i <= 128; ++i) angles.push_back(kPi * i / 128.0);
  for (double k : u_tilde.profile.knots()) angles.push_back(k);
  for (double y : ys) {
    const double kv = k_tilde(y);
    for (double phi : angles) {
      const double v = y == 0.0 ? u_tilde.profile(phi) : u_tilde(ball::BallPoint(phi, y));
      if (v > kv * (1.0 + 1e-9)) {
        throw InputRejection("cap bound: u~ exceeds k~ at phi = " + fmt(phi) + ", y = " + fmt(y), phi, y);
      }
    }
  }

  CapBoundRecord r;
  r.beta = beta;
  r.lhs = ball::cap_average(n, u_tilde.profile, beta);
  const int nn = n.value();
  for (int h = 0; h <= cfg.max_halvings; ++h) {
    const double lambda = std::ldexp(cfg.lambda, -h);
    const auto pw = surface::normalize_pipeline(n, k_tilde, lambda, beta, dk_tilde);
    r.D_measured = pw.D_measured;
    r.D = pw.D;
    r.k0_beta_n = pw.k_tilde_0 * std::pow(beta, nn);
    r.lambda = lambda;
    r.halvings = h;
    r.K = -pw.scale * r.lhs;
    const double kplus = std::max(r.K, 0.0);
    const auto sf = surface::build_surface(n, pw.kw, cfg.surface_points);
    const auto va = surface::build_va(n, sf);
    r.va0 = va.va_at_origin;
    const auto b = surface::verify_surface_bounds(n, sf, va, cfg.surface_samples, cfg.seed);
    double c = 0.0;
    for (const auto& smp : b.samples) {
      const double ua = pw.scale * ball::harmonic_extension_axial(
                                       n, u_tilde.profile, ball::BallPoint(smp.gamma, smp.y),
                                       ball::default_quad_config(), beta, kPi);
      c = std::max(c, ua / ((1.0 + kplus) * smp.va));
    }
    r.C_sf2 = c;
    r.slack = c * r.va0;
    r.slack_pass = r.slack <= 1.0 / 3.0;
    if (r.slack_pass) break;
  }
  const double size = std::pow(r.D, nn + 1) + r.k0_beta_n;
  r.C_ref = 1.0 / (2.0 * r.lambda);
  r.rhs = -r.C_ref * size;
  r.C_measured = std::max(0.0, -r.lhs) / size;
  r.pass = r.lhs >= r.rhs;
  return r;
}

double harnack_constant(ball::Dimension n, double radius_ratio) {
  if (!(radius_ratio > 0.0 && radius_ratio < 1.0)) throw DomainError("harnack_constant: ratio outside (0, 1)");
  return std::pow(1.0 + radius_ratio, n.value()) / (1.0 - radius_ratio);
}

HarnackRecord harnack_lower_bound(ball::Dimension n, const HarmonicTestFunction& U,
                                  const weights::Weight& w, double theta, double alpha, double C1,
                                  double C2) {
  if (!(theta > 0.0 && theta < 0.5)) throw DomainError("harnack: theta outside (0, 1/2)");
  if (!(alpha > 0.0 && alpha <= theta / 4.0 * (1.0 + 1e-12))) {
    throw DomainError("harnack: alpha outside (0, theta/4]");
  }
  HarnackRecord r;
  r.theta = theta;
  r.alpha = alpha;
  r.C1 = C1;
  r.C2 = C2;
  const double lw = w.log_value(theta);
  r.wav1_ratio = exp_diff(w.log_value(theta - 2.0 * alpha), lw);
  r.wav1_pass = r.wav1_ratio <= C1 * (1.0 + 1e-12);
  auto at_depth = ball::AxialBoundaryProfile::from_function(
      [&U, theta](double t) { return U(ball::BallPoint(t, theta)); }, U.profile.knots());
  const double ci = ball::cap_average(n, at_depth, alpha);
  r.wav2_ratio = std::abs(ci) * std::exp(-lw - n.value() * std::log(alpha));
  r.wav2_pass = r.wav2_ratio <= C2 * (1.0 + 1e-12);
  const double sigma = ball::normalized_cap_measure(n, alpha);
  const double H = harnack_constant(n);
  r.C3 = H * (C1 + C2 * std::pow(alpha, n.value()) / sigma) - C1;
  r.value = U(ball::BallPoint(0.0, theta));
  r.bound = -r.C3 * std::exp(lw);
  r.ratio = -r.value * std::exp(-lw);
  if (!r.wav1_pass) r.failed = "wav.1";
  if (!r.wav2_pass) r.failed += r.failed.empty() ? "wav.2" : ",wav.2";
  r.pass = r.wav1_pass && r.wav2_pass && r.ratio <= r.C3;
  return r;
}

std::string theorem_name(Theorem t) {
  switch (t) {
    case Theorem::T1: return "T1";
    case Theorem::T2: return "T2";
    case Theorem::T2prime: return "T2prime";
  }
  return "?";
}

Theorem parse_theorem(const std::string& s) {
  if (s == "T1") return Theorem::T1;
  if (s == "T2") return Theorem::T2;
  if (s == "T2prime") return Theorem::T2prime;
  throw UsageError("unknown theorem '" + s + "' (expected T1, T2 or T2prime)");
}

std::vector<double> theta_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0 && hi >= lo && per_decade > 0)) throw DomainError("theta_grid: bad range");
  const int steps = std::max(1, static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade - 1e-9)));
  std::vector<double> out;
  for (int i = 0; i <= steps; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / steps));
  out.back() = hi;
  if (lo == hi) out.resize(1);
  return out;
}

namespace {

struct Setup {
  double alpha = 0.0;
  double log_divisor = 0.0;  // u~ = U(z (1 - theta)) / exp(log_divisor)
  surface::Fn k_tilde;
  surface::Fn dk_tilde;
  double C1 = 0.0;
};

Setup setup_for(ball::Dimension n, Theorem th, const weights::Weight& w, double theta) {
  const int nn = n.value();
  Setup s;
  switch (th) {
    case Theorem::T1: {
      s.alpha = weights::alpha(w, theta);
      s.log_divisor = w.log_value(theta) + nn * std::log(s.alpha);
      const double ld = s.log_divisor;
      s.k_tilde = [w, theta, ld](double y) { return std::exp(w.log_value(y + theta - y * theta) - ld); };
      s.dk_tilde = [w, theta, ld](double y) {
        const double x = y + theta - y * theta;
        return std::exp(w.log_value(x) - ld) * w.log_slope(x) * (1.0 - theta);
      };
      s.C1 = 2.0;
      break;
    }
    case Theorem::T2prime: {
      s.alpha = theta / 4.0;
      s.k_tilde = [w, theta](double y) { return std::exp(w.log_value(y + theta - y * theta)); };
      s.dk_tilde = [w, theta](double y) {
        const double x = y + theta - y * theta;
        return std::exp(w.log_value(x)) * w.log_slope(x) * (1.0 - theta);
      };
      s.C1 = std::pow(2.0, nn);
      break;
    }
    case Theorem::T2: {
      s.alpha = theta / 4.0;
      s.k_tilde = [nn, theta](double y) { return std::pow(theta + y * (1.0 - theta), -nn); };
      s.dk_tilde = [nn, theta](double y) {
        return -nn * (1.0 - theta) * std::pow(theta + y * (1.0 - theta), -nn - 1);
      };
      s.C1 = std::pow(2.0, 2 * nn + 1);
      break;
    }
  }
  return s;
}

ThetaRecord run_theta(ball::Dimension n, Theorem th, const weights::Weight& w,
                      const weights::Weight& harnack_w, const HarmonicTestFunction& U, double theta,
                      double I0, const PipelineConfig& cfg) {
  const int nn = n.value();
  const Setup s = setup_for(n, th, w, theta);
  ThetaRecord rec;
  rec.theta = theta;
  rec.alpha = s.alpha;
  const auto ut = dilate(U, theta, std::exp(s.log_divisor));
  rec.cap = verify_cap_average_bound(n, s.k_tilde, ut, s.alpha, cfg.cap, s.dk_tilde);
  if (th == Theorem::T2prime) {
    rec.d_bound_pass = rec.cap.D_measured <= std::pow(2.0, double(nn) / (nn + 1)) * I0 * (1.0 + 1e-6);
  }
  // |integral of U over A(theta, alpha)| = divisor |integral of u~ over the cap|,
  // bounded below by the cap inequality and above by k~(0) times the cap measure.
  const double k0 = s.k_tilde(0.0);
  const double sigma = ball::normalized_cap_measure(n, s.alpha);
  const double cap_bound = std::max(-rec.cap.rhs, sigma * k0);
  const double C2 = cap_bound * std::exp(s.log_divisor - nn * std::log(s.alpha) - harnack_w.log_value(theta));
  rec.harnack = harnack_lower_bound(n, U, harnack_w, theta, s.alpha, s.C1, C2);
  const double H = harnack_constant(n);
  const double c1m = std::max(rec.harnack.wav1_ratio, 1.0);
  rec.C3_measured = H * (c1m + rec.harnack.wav2_ratio * std::pow(s.alpha, nn) / sigma) - c1m;
  rec.pass = rec.cap.pass && rec.harnack.pass && rec.d_bound_pass;
  return rec;
}

template <class E>
[[noreturn]] void rethrow_plain(const E& e, double theta) {
  throw E("theta = " + fmt(theta) + ": " + e.what());
}

ThetaRecord run_theta_tagged(ball::Dimension n, Theorem th, const weights::Weight& w,
                             const weights::Weight& harnack_w, const HarmonicTestFunction& U,
                             double theta, double I0, const PipelineConfig& cfg) {
  const std::string tag = "theta = " + fmt(theta) + ": ";
  try {
    return run_theta(n, th, w, harnack_w, U, theta, I0, cfg);
  } catch (const InputRejection& e) {
    throw InputRejection(tag + e.what(), e.phi(), e.y());
  } catch (const AccuracyError& e) {
    throw AccuracyError(tag + e.what(), e.last_estimate(), e.previous_estimate());
  } catch (const MonotonicityError& e) {
    throw MonotonicityError(tag + e.what(), e.location());
  } catch (const DomainError& e) {
    rethrow_plain(e, theta);
  } catch (const ConstructionError& e) {
    rethrow_plain(e, theta);
  } catch (const BracketError& e) {
    rethrow_plain(e, theta);
  } catch (const InvariantViolation& e) {
    rethrow_plain(e, theta);
  }
}

}  // namespace

VerificationReport run_pipeline(ball::Dimension n, Theorem theorem, const weights::Weight& w,
                                const HarmonicTestFunction& U, const std::vector<double>& thetas,
                                const PipelineConfig& cfg) {
  const int nn = n.value();
  if (thetas.empty()) throw DomainError("run_pipeline: empty theta grid");
  for (double t : thetas) {
    if (!(t > 0.0 && t < 0.5)) throw DomainError("run_pipeline: theta outside (0, 1/2)");
  }
  VerificationReport rep;
  rep.theorem = theorem;
  rep.n = nn;
  rep.weight = w.describe();
  rep.test_function = U.provenance;
  rep.theta_grid = thetas;

  weights::Weight harnack_w = w;
  switch (theorem) {
    case Theorem::T1: {
      const auto rc = weights::check_conditions(n, w);
      if (!rc.als_pass) throw DomainError("run_pipeline: T1 needs w/w' -> 0 at the boundary");
      if (!(rc.ar_delta > 0.0 || rc.ar_delta_near0 > 0.0)) {
        throw DomainError("run_pipeline: T1 needs 1 + n (w/w')' bounded below by a positive delta");
      }
      break;
    }
    case Theorem::T2prime: {
      const auto ri = weights::rippon_integral(n, w);
      if (ri.divergent) throw DomainError("run_pipeline: T2prime needs a finite integral of (w/y)^(1/(n+1))");
      rep.I0 = ri.value;
      const double logc = (nn + 1) * std::log(ri.value);
      harnack_w = weights::Weight::from_functions(
          [logc, nn](double y) { return std::exp(logc - nn * std::log(y)); },
          [logc, nn](double y) { return -nn * std::exp(logc - (nn + 1) * std::log(y)); }, {},
          "I0^(n+1) y^-n");
      break;
    }
    case Theorem::T2:
      harnack_w = weights::Weight::theorem2(n);
      break;
  }

  std::vector<ThetaRecord> recs(thetas.size());
  unsigned workers = cfg.threads > 0 ? unsigned(cfg.threads) : std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < thetas.size(); start += workers) {
    std::vector<std::future<ThetaRecord>> jobs;
    const std::size_t stop = std::min(thetas.size(), start + workers);
    for (std::size_t i = start; i < stop; ++i) {
      jobs.push_back(std::async(std::launch::async, [&, i] {
        return run_theta_tagged(n, theorem, w, harnack_w, U, thetas[i], rep.I0, cfg);
      }));
    }
    for (std::size_t i = start; i < stop; ++i) recs[i] = jobs[i - start].get();
  }

  rep.records = std::move(recs);
  rep.lambda = cfg.cap.lambda;
  rep.C3_min = std::numeric_limits<double>::infinity();
  rep.pass = true;
  for (const auto& r : rep.records) {
    rep.lambda = std::min(rep.lambda, r.cap.lambda);
    rep.C3_max = std::max(rep.C3_max, r.harnack.C3);
    rep.C3_min = std::min(rep.C3_min, r.harnack.C3);
    rep.C_measured_max = std::max(rep.C_measured_max, r.cap.C_measured);
    rep.K_max = std::max(rep.K_max, r.cap.K);
    rep.pass = rep.pass && r.pass;
  }
  return rep;
}

}  // namespace cartwright::verify

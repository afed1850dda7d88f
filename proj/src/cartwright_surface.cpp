#include "cartwright/cartwright_surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <numbers>
#include <random>

#include <boost/math/tools/roots.hpp>

#include "cartwright/errors.hpp"
#include "cartwright/quadrature.hpp"

namespace cartwright::surface {

namespace {

constexpr double kPi = std::numbers::pi;

double root_of_ratio(const NormalizedWeightK& kw, double target, double lo, const char* what) {
  auto g = [&](double y) { return y / kw.k(y) - target; };
  const double hi = 1.0;
  if (!(g(hi) > 0.0)) {
    throw BracketError(std::string(what) + ": y/k(y) never reaches the target on (0, 1]");
  }
  if (!(g(lo) <= 0.0)) throw BracketError(std::string(what) + ": no sign change above the lower end");
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::min(std::abs(a), std::abs(b)); };
  std::uintmax_t iters = 4000;
  auto [a, b] = boost::math::tools::bisect(g, lo, hi, tol, iters);
  double y = 0.5 * (a + b);
  if (kw.dk) {
    const double kv = kw.k(y);
    const double slope = (kv - y * kw.dk(y)) / (kv * kv);
    if (slope > 0.0) {
      const double polished = y - g(y) / slope;
      if (polished >= a && polished <= b && std::abs(g(polished)) <= std::abs(g(y))) y = polished;
    }
  }
  return y;
}

}  // namespace

double default_lambda() { return std::min(1.0 / (3.0 * kPi), 1e-2); }

double kernel_integral(ball::Dimension n, const Fn& k) {
  const double inv = 1.0 / (n.value() + 1);
  const double k0 = k(0.0);
  auto f = [&](double y) { return std::pow(k(y) / y, inv); };
  // Below `cut` k is flat to 1e-3 and the integrand is a clean power of y.
  double cut = 1.0;
  for (int j = 0; j < 200 && k(cut) < (1.0 - 1e-3) * k0; ++j) cut *= 0.5;
  numerics::QuadConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 0.0;
  const auto near = numerics::integrate_graded_at_zero(f, cut, cfg);
  if (near.divergent) return std::numeric_limits<double>::infinity();
  if (cut >= 1.0) return near.value;
  return near.value + numerics::integrate(f, numerics::graded_breakpoints(cut, 1.0, cut, cut), cfg).value;
}

NormalizedWeightK NormalizedWeightK::make(ball::Dimension n, Fn k, double lambda, double beta, Fn dk) {
  if (!(lambda > 0.0 && lambda <= 1.0 / (3.0 * kPi) * (1.0 + 1e-12))) {
    throw DomainError("NormalizedWeightK: lambda outside (0, 1/(3 pi)]");
  }
  if (!(beta > 0.0 && beta <= kPi / 2)) throw DomainError("NormalizedWeightK: beta outside (0, pi/2]");
  NormalizedWeightK kw;
  kw.n = n.value();
  kw.k = std::move(k);
  kw.dk = std::move(dk);
  kw.lambda = lambda;
  kw.beta = beta;
  const double k0 = kw.k(0.0);
  if (!(k0 > 0.0 && std::isfinite(k0))) throw InvariantViolation("NormalizedWeightK: k(0) not finite positive");
  double prev = k0;
  for (int i = 1; i <= 400; ++i) {
    const double y = std::pow(10.0, -12.0 + 12.0 * i / 400.0);
    const double v = kw.k(y);
    if (!(v > 0.0) || v > prev) throw MonotonicityError("NormalizedWeightK: k not decreasing", y);
    prev = v;
  }
  if (k0 * std::pow(beta, n.value()) > lambda * (1.0 + 1e-12)) {
    throw InvariantViolation("NormalizedWeightK: k(0) > lambda / beta^n");
  }
  kw.D_bound = kernel_integral(n, kw.k);
  if (!(kw.D_bound <= std::pow(lambda, 1.0 / (n.value() + 1)) * (1.0 + 1e-9))) {
    throw InvariantViolation("NormalizedWeightK: integral of (k/y)^(1/(n+1)) exceeds lambda^(1/(n+1))");
  }
  return kw;
}

PipelineWeight normalize_pipeline(ball::Dimension n, const Fn& k_tilde, double lambda, double beta,
                                  const Fn& dk_tilde) {
  PipelineWeight out;
  out.k_tilde_0 = k_tilde(0.0);
  out.D_measured = kernel_integral(n, k_tilde);
  if (!std::isfinite(out.D_measured)) throw InvariantViolation("pipeline: k~ integral diverges");
  out.D = std::max(out.D_measured, 1.0);
  out.scale = lambda / (std::pow(out.D, n.value() + 1) + out.k_tilde_0 * std::pow(beta, n.value()));
  const double c = out.scale;
  Fn k = [k_tilde, c](double y) { return c * k_tilde(y); };
  Fn dk;
  if (dk_tilde) dk = [dk_tilde, c](double y) { return c * dk_tilde(y); };
  out.kw = NormalizedWeightK::make(n, k, lambda, beta, dk);
  return out;
}

double solve_s(ball::Dimension n, const NormalizedWeightK& kw) {
  return root_of_ratio(kw, std::pow(kw.beta, n.value() + 1), 0.0, "solve_s");
}

double solve_rho(ball::Dimension n, const NormalizedWeightK& kw) {
  const double s = solve_s(n, kw);
  return root_of_ratio(kw, std::pow(kPi - kw.beta, n.value() + 1), s, "solve_rho");
}

SurfaceProfile::SurfaceProfile(NormalizedWeightK kw, double s, double rho, std::vector<double> y,
                               std::vector<double> gamma)
    : kw_(std::move(kw)), s_(s), rho_(rho), y_(std::move(y)), gamma_(std::move(gamma)),
      inverse_(gamma_, y_) {}

double SurfaceProfile::gamma_inner(double y) const {
  return kw_.beta + std::sqrt(y / (kw_.k(y) * std::pow(kw_.beta, kw_.n - 1)));
}

double SurfaceProfile::gamma_outer(double y) const {
  return kw_.beta + std::pow(y / kw_.k(y), 1.0 / (kw_.n + 1));
}

double SurfaceProfile::gamma(double y) const {
  if (!(y >= 0.0 && y <= rho_ * (1.0 + 1e-12))) throw DomainError("gamma: y outside [0, rho]");
  return y <= s_ ? gamma_inner(y) : gamma_outer(y);
}

double SurfaceProfile::y_of_gamma(double g) const {
  if (g < gamma_.front() || g > kPi + 1e-9) throw ConstructionError("y_of_gamma: angle outside [beta, pi]");
  if (g >= gamma_.back()) return y_.back();
  return inverse_(g);
}

SurfaceProfile build_surface(ball::Dimension n, const NormalizedWeightK& kw, int points) {
  if (points < 100) throw DomainError("build_surface: need at least 100 grid points");
  const double s = solve_s(n, kw);
  const double rho = solve_rho(n, kw);
  std::vector<double> y{0.0, s, rho};
  const int around_s = points / 20;
  const int main = points - around_s - 3;
  const double lo = 1e-8 * s;
  for (int i = 0; i < main; ++i) y.push_back(lo * std::pow(rho / lo, double(i) / (main - 1)));
  for (int i = 0; i < around_s; ++i) {
    const double v = 0.5 * s * std::pow(4.0, double(i) / (around_s - 1));
    if (v < rho) y.push_back(v);
  }
  std::sort(y.begin(), y.end());
  y.erase(std::unique(y.begin(), y.end(),
                      [](double a, double b) { return b - a <= 1e-12 * b; }),
          y.end());
  while (y.back() > rho * (1.0 + 1e-12)) y.pop_back();
  if (y.back() >= rho * (1.0 - 1e-12)) {
    y.back() = rho;
  } else {
    y.push_back(rho);
  }

  std::vector<double> g(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = y[i];
    g[i] = v <= s ? kw.beta + std::sqrt(v / (kw.k(v) * std::pow(kw.beta, kw.n - 1)))
                  : kw.beta + std::pow(v / kw.k(v), 1.0 / (kw.n + 1));
    if (i > 0 && !(g[i] > g[i - 1])) {
      throw ConstructionError("build_surface: gamma not strictly increasing near y = " +
                              std::to_string(v));
    }
  }
  return SurfaceProfile(kw, s, rho, std::move(y), std::move(g));
}

VaFunction build_va(ball::Dimension n, const SurfaceProfile& surface) {
  const double beta = surface.beta();
  auto shared = std::make_shared<const SurfaceProfile>(surface);
  auto value = [shared, beta](double t) {
    if (t < beta) return 0.0;
    return shared->weight().k(shared->y_of_gamma(std::min(t, kPi)));
  };
  std::vector<double> knots{beta, std::min(2.0 * beta, kPi)};
  VaFunction out{ball::AxialBoundaryProfile::from_function(value, knots), 0.0};
  const int m = n.value() - 1;
  auto bp = numerics::merge_breakpoints(
      [&] {
        auto p = numerics::graded_breakpoints(beta, kPi, beta, 1e-4 * beta);
        p.push_back(2.0 * beta);
        return p;
      }(),
      beta, kPi);
  numerics::QuadConfig cfg = ball::default_quad_config();
  const auto r = numerics::integrate(
      [&](double t) { return value(t) * std::pow(std::sin(t), m); }, bp, cfg);
  out.va_at_origin = ball::sphere_normalizer(n) * r.value;
  return out;
}

SurfaceBounds verify_surface_bounds(ball::Dimension n, const SurfaceProfile& surface,
                                    const VaFunction& va, int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw DomainError("verify_surface_bounds: need at least one sample");
  SurfaceBounds out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lo = 1e-6 * surface.s(), hi = surface.rho();
  const double beta = surface.beta();
  const auto cfg = ball::default_quad_config();
  out.mu_over_k_min = out.va_over_k_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sample_count; ++i) {
    SurfaceSample smp;
    smp.y = lo * std::pow(hi / lo, u(rng));
    smp.gamma = std::min(surface.gamma(smp.y), kPi);
    const double ratio = smp.y / (smp.gamma - beta);
    out.ylphb_max = std::max(out.ylphb_max, ratio);
    if (!(ratio <= 1.0)) {
      out.ylphb_pass = false;
      throw InvariantViolation("surface: y > gamma(y) - beta at a sampled point");
    }
    smp.k = surface.weight().k(smp.y);
    smp.mu_at_beta = ball::averaged_kernel(n, smp.gamma, smp.y, beta, ball::MuMode::quadrature, cfg).value;
    smp.va = ball::harmonic_extension_axial(n, va.profile, ball::BallPoint(smp.gamma, smp.y), cfg);
    out.mu_over_k_max = std::max(out.mu_over_k_max, smp.mu_at_beta / smp.k);
    out.mu_over_k_min = std::min(out.mu_over_k_min, smp.mu_at_beta / smp.k);
    out.va_over_k_min = std::min(out.va_over_k_min, smp.va / smp.k);
    out.va_over_k_max = std::max(out.va_over_k_max, smp.va / smp.k);
    out.samples.push_back(smp);
  }
  return out;
}

}  // namespace cartwright::surface

#include "cartwright/ball_geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cartwright/errors.hpp"
#include "cartwright/interpolation.hpp"
#include "cartwright/simd_kernels.hpp"

namespace cartwright::ball {

namespace {

constexpr double kPi = std::numbers::pi;

double int_pow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// integral_0^pi sin^m = sqrt(pi) Gamma((m+1)/2) / Gamma(m/2 + 1)
double sine_power_integral(int m) {
  return std::sqrt(kPi) * std::exp(std::lgamma(0.5 * (m + 1)) - std::lgamma(0.5 * m + 1.0));
}

// |(1-y)x - xi|^2 written without cancellation: y^2 + 4(1-y) sin^2(psi/2).
double squared_distance(double y, double psi) {
  const double s = std::sin(0.5 * psi);
  return y * y + 4.0 * (1.0 - y) * s * s;
}

void check_point(double a, double y, double t) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("boundary distance y outside [0, 1]");
  if (!(a >= 0.0 && a <= kPi) || !(t >= 0.0 && t <= kPi)) {
    throw DomainError("angle outside [0, pi]");
  }
}

numerics::QuadConfig inner_config(const numerics::QuadConfig& cfg) {
  numerics::QuadConfig inner = cfg;
  inner.rel_tol = cfg.rel_tol * 0.1;
  inner.abs_tol = 0.0;
  return inner;
}

// Azimuthal average over S(0,t) for n >= 2, without the y(2-y) factor.
// `diff` = a - t, passed separately so callers can supply it exactly.
double azimuthal_average(int n, double a, double y, double t, double diff,
                         const numerics::QuadConfig& cfg) {
  const double d2 = squared_distance(y, diff);
  const double c = 4.0 * (1.0 - y) * std::sin(a) * std::sin(t);
  const int m = n + 1;
  if (!(c > 0.0)) {
    // Degenerate circle or centre of the ball: the kernel is constant on S(0,t).
    std::array<double, 1> base{d2};
    std::array<double, 1> out{};
    simd::inverse_half_power(base, m, out);
    return out[0];
  }
  // Peak of (d2 + c sin^2(w/2))^(-m/2) at w = 0 has width ~ 2 sqrt(d2 / c).
  const double width = 2.0 * std::sqrt(d2 / c);
  std::vector<double> bp = numerics::graded_breakpoints(0.0, kPi, 0.0, std::min(width, kPi));
  const int sine_exp = n - 2;
  numerics::BatchIntegrand f = [&](std::span<const double> w, std::span<double> fw) {
    std::array<double, 32> base{};
    std::array<double, 32> val{};
    const std::size_t k = w.size();
    for (std::size_t i = 0; i < k; ++i) {
      const double s = std::sin(0.5 * w[i]);
      base[i] = d2 + c * s * s;
    }
    simd::inverse_half_power({base.data(), k}, m, {val.data(), k});
    for (std::size_t i = 0; i < k; ++i) {
      fw[i] = sine_exp == 0 ? val[i] : val[i] * int_pow(std::sin(w[i]), sine_exp);
    }
  };
  const auto r = numerics::integrate(f, bp, cfg);
  return r.value / sine_power_integral(sine_exp);
}

}  // namespace

Dimension::Dimension(int n) : n_(n) {
  if (n < 1) throw DomainError("dimension n must be >= 1, got " + std::to_string(n));
}

BallPoint::BallPoint(double phi_, double y_) : phi(phi_), y(y_) {
  if (!(phi >= 0.0 && phi <= kPi)) throw DomainError("BallPoint: phi outside [0, pi]");
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("BallPoint: y outside [0, 1]");
}

AxialBoundaryProfile::AxialBoundaryProfile(std::function<double(double)> f,
                                           std::vector<double> knots)
    : f_(std::move(f)), knots_(std::move(knots)) {}

AxialBoundaryProfile AxialBoundaryProfile::from_function(std::function<double(double)> f,
                                                         std::vector<double> knots) {
  if (!f) throw DomainError("AxialBoundaryProfile: empty function");
  return AxialBoundaryProfile(std::move(f), std::move(knots));
}

AxialBoundaryProfile AxialBoundaryProfile::from_grid(std::vector<double> t, std::vector<double> v) {
  if (t.empty() || t.front() > 0.0 || t.back() < kPi) {
    throw DomainError("AxialBoundaryProfile: grid must cover [0, pi]");
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError("AxialBoundaryProfile: non-finite grid value");
  }
  numerics::MonotoneCubic spline(std::move(t), std::move(v));
  return AxialBoundaryProfile([spline](double x) { return spline(x); }, {});
}

AxialBoundaryProfile AxialBoundaryProfile::constant(double c) {
  return AxialBoundaryProfile([c](double) { return c; }, {});
}

numerics::QuadConfig default_quad_config() {
  numerics::QuadConfig cfg;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-12;
  cfg.max_depth = 20;
  return cfg;
}

double poisson_kernel(Dimension n, double y, double psi) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("poisson_kernel: y outside [0, 1]");
  if (!(std::abs(psi) <= kPi)) throw DomainError("poisson_kernel: psi outside [-pi, pi]");
  if (y == 0.0 && psi == 0.0) throw DomainError("poisson_kernel: singular at y = 0, psi = 0");
  const std::array<double, 1> base{squared_distance(y, psi)};
  std::array<double, 1> out{};
  simd::inverse_half_power(base, n.value() + 1, out);
  return y * (2.0 - y) * out[0];
}

double cap_boundary_distance(double y, double a, double t) {
  check_point(a, y, t);
  if (t > a) throw DomainError("cap_boundary_distance: requires t <= a");
  return std::sqrt(squared_distance(y, a - t));
}

MuValue averaged_kernel(Dimension n, double a, double y, double t, MuMode mode,
                        const numerics::QuadConfig& cfg) {
  check_point(a, y, t);
  const int dim = n.value();
  switch (mode) {
    case MuMode::quadrature: {
      const double numer = y * (2.0 - y);
      if (y == 0.0) {
        if (a == t) return MuValue{std::numeric_limits<double>::infinity(), true};
        return MuValue{0.0, false};
      }
      if (dim == 1) {
        // S(0,t) is the pair of points at angles +-t.
        std::array<double, 2> base{squared_distance(y, a - t), squared_distance(y, a + t)};
        std::array<double, 2> out{};
        simd::inverse_half_power(base, 2, out);
        return MuValue{0.5 * numer * (out[0] + out[1]), false};
      }
      return MuValue{numer * azimuthal_average(dim, a, y, t, a - t, inner_config(cfg)), false};
    }
    case MuMode::lemma1_estimate: {
      if (t > a) throw DomainError("averaged_kernel: estimates require t <= a");
      if (y == 0.0) throw DomainError("averaged_kernel: estimates require y > 0");
      const double d2 = squared_distance(y, a - t);
      const double d = std::sqrt(d2);
      return MuValue{y / (d2 * (int_pow(d, dim - 1) + int_pow(std::sin(a), dim - 1))), false};
    }
    case MuMode::smallangle_estimate: {
      if (t > a) throw DomainError("averaged_kernel: estimates require t <= a");
      if (a > 0.5 * kPi) throw DomainError("averaged_kernel: small-angle form requires a <= pi/2");
      if (y == 0.0) throw DomainError("averaged_kernel: estimates require y > 0");
      const double r2 = (a - t) * (a - t) + y * y;
      return MuValue{y / (r2 * (std::pow(r2, 0.5 * (dim - 1)) + int_pow(a, dim - 1))), false};
    }
  }
  throw DomainError("averaged_kernel: unknown mode");
}

double sphere_normalizer(Dimension n) { return 1.0 / sine_power_integral(n.value() - 1); }

double normalized_cap_measure(Dimension n, double beta) {
  if (!(beta >= 0.0 && beta <= kPi)) throw DomainError("cap measure: beta outside [0, pi]");
  if (beta == 0.0) return 0.0;
  // integral_0^beta sin^m by the reduction J_m = ((m-1) J_{m-2} - sin^(m-1) cos) / m.
  const int m = n.value() - 1;
  const double s = std::sin(beta), c = std::cos(beta);
  double j = (m % 2 == 0) ? beta : 1.0 - c;
  for (int k = (m % 2 == 0) ? 2 : 3; k <= m; k += 2) {
    j = ((k - 1) * j - int_pow(s, k - 1) * c) / k;
  }
  return std::min(1.0, sphere_normalizer(n) * j);
}

double harmonic_extension_axial(Dimension n, const AxialBoundaryProfile& profile,
                                const BallPoint& p, const numerics::QuadConfig& cfg, double t_lo,
                                double t_hi) {
  if (!(p.y > 0.0)) throw DomainError("harmonic_extension_axial: point must be interior (y > 0)");
  if (t_hi < 0.0) t_hi = kPi;
  if (!(t_lo >= 0.0 && t_hi <= kPi && t_lo <= t_hi)) {
    throw DomainError("harmonic_extension_axial: bad angular range");
  }
  if (t_lo == t_hi) return 0.0;
  const int dim = n.value();
  const double a = p.phi;
  const double y = p.y;
  // Integrate in u = t - a: the kernel peaks at u = 0 with width ~ y, and
  // a - t = -u stays exact however small y is.
  std::vector<double> bp = numerics::graded_breakpoints(t_lo - a, t_hi - a, 0.0, y);
  for (double k : profile.knots()) bp.push_back(k - a);
  bp = numerics::merge_breakpoints(std::move(bp), t_lo - a, t_hi - a);
  const numerics::QuadConfig inner = inner_config(cfg);
  const double numer = y * (2.0 - y);
  auto angle = [&](double u) { return std::clamp(a + u, t_lo, t_hi); };

  numerics::BatchIntegrand f;
  if (dim == 1) {
    f = [&](std::span<const double> u, std::span<double> fu) {
      std::array<double, 64> base{};
      std::array<double, 64> val{};
      const std::size_t k = u.size();
      for (std::size_t i = 0; i < k; ++i) {
        base[2 * i] = squared_distance(y, u[i]);
        base[2 * i + 1] = squared_distance(y, 2.0 * a + u[i]);
      }
      simd::inverse_half_power({base.data(), 2 * k}, 2, {val.data(), 2 * k});
      for (std::size_t i = 0; i < k; ++i) {
        fu[i] = profile(angle(u[i])) * 0.5 * numer * (val[2 * i] + val[2 * i + 1]);
      }
    };
  } else {
    f = [&](std::span<const double> u, std::span<double> fu) {
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double t = angle(u[i]);
        const double phi = profile(t);
        if (phi == 0.0) {
          fu[i] = 0.0;
          continue;
        }
        const double mu = numer * azimuthal_average(dim, a, y, t, -u[i], inner);
        fu[i] = phi * mu * int_pow(std::sin(t), dim - 1);
      }
    };
  }
  const auto r = numerics::integrate(f, bp, cfg);
  return sphere_normalizer(n) * r.value;
}

double cap_average(Dimension n, const AxialBoundaryProfile& profile, double beta,
                   const numerics::QuadConfig& cfg) {
  if (!(beta >= 0.0 && beta <= kPi)) throw DomainError("cap_average: beta outside [0, pi]");
  if (beta == 0.0) return 0.0;
  const int m = n.value() - 1;
  std::vector<double> bp = numerics::merge_breakpoints(profile.knots(), 0.0, beta);
  const auto r = numerics::integrate(
      [&](double t) { return profile(t) * int_pow(std::sin(t), m); }, bp, cfg);
  return sphere_normalizer(n) * r.value;
}

}  // namespace cartwright::ball

#pragma once

// The sharpness example: an axially symmetric harmonic function
// V(rho, phi) = rho^-n sum_{k=0}^{n+1} f_k(cos phi) log^k(1/rho), where
// rho e^{i phi} = 1 - z, built from the ODE cascade
//   (1 - t^2) f_k'' - n t f_k' + n f_k = -(k+1) ((n+1) f_{k+1} + (k+2) f_{k+2}).

#include <functional>
#include <memory>
#include <vector>

#include "cartwright/ball_geometry.hpp"
#include "cartwright/bound_verifier.hpp"
#include "cartwright/interpolation.hpp"

namespace cartwright::extremal {

// Second solution near t = 1 in u = 1 - t:
//   f2 = A (1 - u) log u + u^(1 - n/2) sum_j c_j u^j.
struct FrobeniusSeries {
  int n = 2;
  double A = 0.0;
  std::vector<double> c;
  double tail_ratio = 0.0;  // |c_N / c_(N-1)|

  double value(double u) const;
  double du(double u) const;
  // value * u^(n/2 - 1): bounded as u -> 0
  double regular(double u) const;
};

FrobeniusSeries frobenius_series(int n, int order = 40);

struct HomogeneousConfig {
  int series_order = 40;
  double glue_u = 1e-3;  // series on (1 - glue_u, 1], integration below
  int cheb_order = 24;
};

class HomogeneousSolutions {
 public:
  int n() const noexcept { return n_; }
  double glue_u() const noexcept { return u0_; }
  const FrobeniusSeries& series() const noexcept { return series_; }

  double f1(double t) const { return t; }
  double f2(double t) const;
  double f2_prime(double t) const;
  // f2 (1 - t)^(n/2 - 1)
  double f2_regular(double t) const;
  // (f1 f2' - f1' f2) (1 - t)^(n/2)
  double g(double t) const;
  double g_min() const noexcept { return g_min_; }

 private:
  friend HomogeneousSolutions homogeneous_solutions(int n, const HomogeneousConfig& cfg);
  int n_ = 2;
  double u0_ = 1e-3;
  FrobeniusSeries series_;
  numerics::PiecewiseChebyshev f2_;
  numerics::PiecewiseChebyshev df2_;
  double g_min_ = 0.0;
};

// n >= 2. AccuracyError if the series tail is too large at the glue point,
// ConstructionError if g vanishes on the check grid.
HomogeneousSolutions homogeneous_solutions(int n, const HomogeneousConfig& cfg = {});

// A bounded solution on [0, 1] of (1 - t^2) f'' - n t f' + n f = r, plus lin * t.
class BoundedSolution {
 public:
  static BoundedSolution linear(double slope);

  double operator()(double t) const;
  double derivative(double t) const;
  // From the equation itself: (r + n t f' - n f) / (1 - t^2), t < 1.
  double second_derivative(double t) const;

 private:
  friend BoundedSolution solve_inhomogeneous(int n, std::function<double(double)> r,
                                             std::shared_ptr<const HomogeneousSolutions> homs);
  double lin_ = 0.0;
  std::shared_ptr<const HomogeneousSolutions> homs_;
  std::function<double(double)> r_;
  numerics::PiecewiseChebyshev F_;  // integral_0^t r f2 (1-s)^(n/2) / (g (1 - s^2))
  numerics::PiecewiseChebyshev I_;  // integral_t^1 s r (1-s)^(n/2) / (g (1 - s^2))
};

// f = -t F(t) - f2(t) I(t); the variation-of-parameters solution that stays
// bounded at t = 1.
BoundedSolution solve_inhomogeneous(int n, std::function<double(double)> r,
                                    std::shared_ptr<const HomogeneousSolutions> homs);

// Panel edges on [0, 1], geometrically graded toward t = 1.
std::vector<double> cascade_edges();

struct LogPolySolution {
  int n = 2;
  std::shared_ptr<const HomogeneousSolutions> homs;
  std::vector<BoundedSolution> f;  // f[0..n+1]; f[n+1] = -t

  // sum_k f_k(t) L^k
  double poly(double t, double L) const;
};

LogPolySolution build_cascade(int n, const HomogeneousConfig& cfg = {});

// rho in (0, 1], cos phi in [0, 1].
double assemble_V(const LogPolySolution& s, double rho, double phi);

struct ExampleGrids {
  double rho_lo = 0.05, rho_hi = 0.9;
  double phi_lo = 0.0, phi_hi = 1.2;
  int rho_points = 30, phi_points = 30;
  double h = 1e-3;                          // step in log rho and in phi
  double residual_threshold = 1e-6;
  double axis_lo = 1e-4, axis_hi = 0.1;     // on-axis range for C1 and the fit
  int axis_points = 60;
  double upper_rho_lo = 1e-8;               // sweep for the upper constant
  int upper_points = 80;
};

struct ExampleRecord {
  double pde_residual_max = 0.0;       // |rho^2 Lap V| / (rho^-n (1 + log(1/rho))^(n+1))
  double pde_residual_max_half = 0.0;  // same with h/2
  double convergence_ratio = 0.0;      // max / max_half, about 4 for a second-order stencil
  bool residual_pass = false;          // pde_residual_max below the threshold
  double upper_C = 0.0;                // max V rho^n cos^n phi
  double upper_M = 0.0;                // max |sum_{k<=n} f_k| / max(1, L)^n
  double lower_C1 = 0.0;               // min -V(t,0) t^n / log^(n+1)(1/t)
  double log_exponent_fit = 0.0;       // slope of log(-V t^n) on log log(1/t), axis range
  double log_exponent_fit_deep = 0.0;  // same for log(1/t) in [100, 1000]; diagnostic
  double last_decade_spread = 0.0;     // max/min - 1 of the C1 ratio over the lowest decade
  std::vector<double> axis_t;
  std::vector<double> axis_ratio;      // -V(t,0) t^n / log^(n+1)(1/t)
};

// Laplace residual of V at (rho, phi) with log-polar steps h, scaled as above.
double pde_residual(const LogPolySolution& s, double rho, double phi, double h);

ExampleRecord verify_example(const LogPolySolution& s, const ExampleGrids& g = {});

// Re(-(1-z) log^2(1-z)) and Re(-log^2(1-z) / (1-z)); DomainError at z = 1.
double closed_form_n1(double x, double y);
double closed_form_n1_variant(double x, double y);

struct ClosedFormRecord {
  double harmonic_residual_max = 0.0;
  double axis_ratio_small = 0.0;   // -U(r) (1-r) / log^2(1/(1-r)) at 1-r = 1e-8
  double axis_ratio_mid = 0.0;     // same at 1-r = 1e-4
  double upper_C = 0.0;            // max U (1 - |z|) on a sweep
};

ClosedFormRecord verify_closed_form_n1(bool variant, int samples = 100, std::uint64_t seed = 7);

// U = (V - V(0)) / c on the ball, with c fitted so U <= y^-n / 1.1 on a
// sweep. n = 1 uses the closed-form variant.
verify::HarmonicTestFunction extremal_test_function(int n, const HomogeneousConfig& cfg = {});

}  // namespace cartwright::extremal

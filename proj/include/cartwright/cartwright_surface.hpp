#pragma once

// The auxiliary surface Gamma_a = {phi = gamma(y)} over the complement of
// the cap A(0, beta), and the harmonic function v_a whose boundary values
// are k(y) on Gamma_a and zero on the cap.

#include <cstdint>
#include <functional>
#include <vector>

#include "cartwright/ball_geometry.hpp"
#include "cartwright/interpolation.hpp"

namespace cartwright::surface {

using Fn = std::function<double(double)>;

// integral_0^1 (k(y)/y)^(1/(n+1)) dy for a decreasing k with k(0) finite.
double kernel_integral(ball::Dimension n, const Fn& k);

struct NormalizedWeightK {
  int n = 1;
  Fn k;       // decreasing on [0, 1], k(0) finite
  Fn dk;      // optional; enables the Newton polish of the roots
  double lambda = 0.0;
  double beta = 0.0;
  double D_bound = 0.0;  // integral_0^1 (k/y)^(1/(n+1)) dy

  // Checks k(0) <= lambda / beta^n and D_bound <= lambda^(1/(n+1)) (and the
  // ranges of lambda and beta); throws InvariantViolation otherwise.
  static NormalizedWeightK make(ball::Dimension n, Fn k, double lambda, double beta, Fn dk = {});
};

// k = lambda / (D^(n+1) + k~(0) beta^n) * k~ with D = max(measured D~, 1).
struct PipelineWeight {
  NormalizedWeightK kw;
  double scale = 0.0;    // lambda / (D^(n+1) + k~(0) beta^n)
  double D_measured = 0.0;
  double D = 0.0;
  double k_tilde_0 = 0.0;
};

PipelineWeight normalize_pipeline(ball::Dimension n, const Fn& k_tilde, double lambda, double beta,
                                  const Fn& dk_tilde = {});

// min(1/(3 pi), 1e-2)
double default_lambda();

// Root of y / k(y) = beta^(n+1) and of y / k(y) = (pi - beta)^(n+1).
double solve_s(ball::Dimension n, const NormalizedWeightK& kw);
double solve_rho(ball::Dimension n, const NormalizedWeightK& kw);

class SurfaceProfile {
 public:
  SurfaceProfile(NormalizedWeightK kw, double s, double rho, std::vector<double> y,
                 std::vector<double> gamma);

  double s() const noexcept { return s_; }
  double rho() const noexcept { return rho_; }
  double beta() const noexcept { return kw_.beta; }
  const NormalizedWeightK& weight() const noexcept { return kw_; }

  // Closed-form gamma on [0, rho]; the two branches separately.
  double gamma(double y) const;
  double gamma_inner(double y) const;  // beta + sqrt(y / (k beta^(n-1)))
  double gamma_outer(double y) const;  // beta + (y / k)^(1/(n+1))
  // Interpolated inverse on [beta, pi].
  double y_of_gamma(double g) const;

  const std::vector<double>& y_grid() const noexcept { return y_; }
  const std::vector<double>& gamma_grid() const noexcept { return gamma_; }

 private:
  NormalizedWeightK kw_;
  double s_;
  double rho_;
  std::vector<double> y_;
  std::vector<double> gamma_;
  numerics::MonotoneCubic inverse_;
};

SurfaceProfile build_surface(ball::Dimension n, const NormalizedWeightK& kw, int points = 10000);

struct VaFunction {
  ball::AxialBoundaryProfile profile;
  double va_at_origin = 0.0;
};

VaFunction build_va(ball::Dimension n, const SurfaceProfile& surface);

struct SurfaceSample {
  double y = 0.0;
  double gamma = 0.0;
  double k = 0.0;
  double mu_at_beta = 0.0;
  double va = 0.0;
};

struct SurfaceBounds {
  bool ylphb_pass = true;
  double ylphb_max = 0.0;   // max y / (gamma(y) - beta)
  double mu_over_k_max = 0.0;
  double mu_over_k_min = 0.0;
  double va_over_k_min = 0.0;
  double va_over_k_max = 0.0;
  std::vector<SurfaceSample> samples;
};

// Log-uniform y samples on [y_lo, rho] with y_lo = 1e-6 * s; throws
// InvariantViolation if y > gamma(y) - beta anywhere.
SurfaceBounds verify_surface_bounds(ball::Dimension n, const SurfaceProfile& surface,
                                    const VaFunction& va, int sample_count, std::uint64_t seed);

}  // namespace cartwright::surface

#pragma once

// End-to-end checks of the lower bound: the cap-average inequality on
// concrete harmonic functions, the Harnack step, and the per-theta
// pipelines for the three weight regimes.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cartwright/ball_geometry.hpp"
#include "cartwright/cartwright_surface.hpp"
#include "cartwright/weight.hpp"

namespace cartwright::verify {

using PointFn = std::function<double(const ball::BallPoint&)>;

struct HarmonicTestFunction {
  ball::AxialBoundaryProfile profile;
  PointFn evaluator;
  weights::Weight envelope;  // U <= envelope(y) on the sampled grid
  std::string provenance;

  double operator()(const ball::BallPoint& p) const { return evaluator(p); }
};

// scale * (P at depth 1 - (1-y0)(1-y) - 1), pole on the axis at angle 0 or pi.
// scale is fitted so that max U(., y) / w(y) = 1/1.1 over a log grid in y.
HarmonicTestFunction make_poisson_test(ball::Dimension n, double pole_angle, double y0,
                                       const weights::Weight& w);

// U(z (1 - theta)), divided by `divisor`. The boundary profile is the
// evaluator at depth theta; the envelope is carried over unchanged.
HarmonicTestFunction dilate(const HarmonicTestFunction& u, double theta, double divisor = 1.0);

// Extensions of profile * 1{t <= beta} and profile * 1{t > beta}.
std::pair<PointFn, PointFn> split_extension(ball::Dimension n, const ball::AxialBoundaryProfile& profile,
                                            double beta,
                                            const numerics::QuadConfig& cfg = ball::default_quad_config());

struct CapBoundConfig {
  double lambda = surface::default_lambda();
  int max_halvings = 6;
  int surface_samples = 32;
  int surface_points = 10000;
  std::uint64_t seed = 42;
};

struct CapBoundRecord {
  double beta = 0.0;
  double D_measured = 0.0;
  double D = 0.0;             // max(D_measured, 1)
  double k0_beta_n = 0.0;     // k~(0) beta^n
  double lhs = 0.0;           // integral of u~(., 0) over the cap, normalized measure
  double rhs = 0.0;           // -C_ref (D^(n+1) + k~(0) beta^n)
  double C_ref = 0.0;         // 1 / (2 lambda)
  double C_measured = 0.0;    // max(0, -lhs) / (D^(n+1) + k~(0) beta^n)
  double K = 0.0;             // -u_A(0) after renormalization
  double lambda = 0.0;        // after halvings
  int halvings = 0;
  double va0 = 0.0;           // v_a(0)
  double C_sf2 = 0.0;         // max of u_a / ((1 + K) v_a) on surface samples
  double slack = 0.0;         // C_sf2 v_a(0), wanted <= 1/3
  bool slack_pass = false;
  bool pass = false;          // lhs >= rhs
};

// Rejects (InputRejection, with the location) when u~ > k~ somewhere on
// the sampling grid.
CapBoundRecord verify_cap_average_bound(ball::Dimension n, const surface::Fn& k_tilde,
                                        const HarmonicTestFunction& u_tilde, double beta,
                                        const CapBoundConfig& cfg = {},
                                        const surface::Fn& dk_tilde = {});

// Sharp sup of v(center) / v(x) over |x - center| <= r R for nonnegative
// harmonic v in a ball of radius R in R^(n+1): (1 + r)^n / (1 - r).
double harnack_constant(ball::Dimension n, double radius_ratio = 0.5);

struct HarnackRecord {
  double theta = 0.0;
  double alpha = 0.0;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0;
  double wav1_ratio = 0.0;  // w(theta - 2 alpha) / w(theta)
  double wav2_ratio = 0.0;  // |cap integral over A(theta, alpha)| / (alpha^n w(theta))
  bool wav1_pass = false;
  bool wav2_pass = false;
  double value = 0.0;       // U(eta, theta)
  double bound = 0.0;       // -C3 w(theta)
  double ratio = 0.0;       // -U(eta, theta) / w(theta)
  bool pass = false;        // value >= bound, with both conditions holding
  std::string failed;       // "", "wav.1", "wav.2" or "wav.1,wav.2"
};

HarnackRecord harnack_lower_bound(ball::Dimension n, const HarmonicTestFunction& U,
                                  const weights::Weight& w, double theta, double alpha, double C1,
                                  double C2);

enum class Theorem { T1, T2, T2prime };
std::string theorem_name(Theorem t);
Theorem parse_theorem(const std::string& s);

// Log-spaced, `per_decade` points per decade, both ends included.
std::vector<double> theta_grid(double lo, double hi, int per_decade = 20);

struct ThetaRecord {
  double theta = 0.0;
  double alpha = 0.0;  // beta of the cap bound and alpha of the Harnack step
  CapBoundRecord cap;
  HarnackRecord harnack;
  double C3_measured = 0.0;  // C3 recomputed from the measured wav ratios
  bool d_bound_pass = true;  // T2prime: D <= 2^(n/(n+1)) I0
  bool pass = false;
};

struct VerificationReport {
  Theorem theorem = Theorem::T1;
  int n = 1;
  std::string weight;
  std::string test_function;
  double lambda = 0.0;
  double I0 = 0.0;  // T2prime only
  std::vector<double> theta_grid;
  std::vector<ThetaRecord> records;
  double C3_max = 0.0, C3_min = 0.0;
  double C_measured_max = 0.0;
  double K_max = 0.0;
  bool pass = false;
};

struct PipelineConfig {
  CapBoundConfig cap;
  int threads = 0;  // 0: hardware concurrency
};

// Per theta: k~, u~ and beta for the chosen theorem, the cap-average
// bound, then the Harnack step. Stage errors are rethrown with theta.
VerificationReport run_pipeline(ball::Dimension n, Theorem theorem, const weights::Weight& w,
                                const HarmonicTestFunction& U, const std::vector<double>& thetas,
                                const PipelineConfig& cfg = {});

}  // namespace cartwright::verify

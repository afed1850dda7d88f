#pragma once

// Poisson kernel of the unit ball in R^(n+1), its average over the boundary
// circles of caps around the south pole, and axially symmetric harmonic
// extension. Angles are measured from the south pole; y = 1 - |z|.

#include <functional>
#include <vector>

#include "cartwright/quadrature.hpp"

namespace cartwright::ball {

// Ball lives in R^(n+1).
class Dimension {
 public:
  explicit Dimension(int n);
  int value() const noexcept { return n_; }
  operator int() const noexcept { return n_; }

 private:
  int n_;
};

struct BallPoint {
  double phi;  // angle to the south pole, [0, pi]
  double y;    // distance to the sphere, [0, 1]

  BallPoint(double phi, double y);
};

// Boundary data depending only on the polar angle t in [0, pi].
class AxialBoundaryProfile {
 public:
  // `knots` are angles where the data is non-smooth; quadratures split there.
  static AxialBoundaryProfile from_function(std::function<double(double)> f,
                                            std::vector<double> knots = {});
  // Monotone piecewise-cubic through (t[i], v[i]); t strictly increasing and
  // covering [0, pi].
  static AxialBoundaryProfile from_grid(std::vector<double> t, std::vector<double> v);
  static AxialBoundaryProfile constant(double c);

  double operator()(double t) const { return f_(t); }
  const std::vector<double>& knots() const noexcept { return knots_; }

 private:
  AxialBoundaryProfile(std::function<double(double)> f, std::vector<double> knots);

  std::function<double(double)> f_;
  std::vector<double> knots_;
};

enum class MuMode { quadrature, lemma1_estimate, smallangle_estimate };

struct MuValue {
  double value = 0.0;
  bool unbounded = false;
};

// Kernel quadrature defaults: rel 1e-9, abs 1e-12, 20 refinement levels.
numerics::QuadConfig default_quad_config();

// y(2-y) / |(1-y)x - xi|^(n+1) for the angle psi between x and xi.
double poisson_kernel(Dimension n, double y, double psi);

// Distance between the boundary circle S(0,t) and the circle S(y,a), t <= a.
double cap_boundary_distance(double y, double a, double t);

// mu(a, y, t): mean of the Poisson kernel at the point (a, y) over S(0, t).
MuValue averaged_kernel(Dimension n, double a, double y, double t, MuMode mode,
                        const numerics::QuadConfig& cfg = default_quad_config());

// 1 / integral_0^pi sin^(n-1) t dt: fixes the normalized surface measure.
double sphere_normalizer(Dimension n);

// Normalized surface measure of the cap {phi <= beta}.
double normalized_cap_measure(Dimension n, double beta);

// Harmonic extension of axial boundary data to p, restricted to boundary
// angles in [t_lo, t_hi] (default: the whole sphere).
double harmonic_extension_axial(Dimension n, const AxialBoundaryProfile& profile,
                                const BallPoint& p,
                                const numerics::QuadConfig& cfg = default_quad_config(),
                                double t_lo = 0.0, double t_hi = -1.0);

// Integral of the boundary data over the cap {phi <= beta}, normalized measure.
double cap_average(Dimension n, const AxialBoundaryProfile& profile, double beta,
                   const numerics::QuadConfig& cfg = default_quad_config());

}  // namespace cartwright::ball

#pragma once

#include <memory>
#include <span>
#include <vector>

namespace cartwright::numerics {

// Monotonicity-preserving piecewise cubic through strictly increasing knots.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;
  double front() const noexcept { return lo_; }
  double back() const noexcept { return hi_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

// Piecewise Chebyshev series on consecutive panels [edges[i], edges[i+1]],
// sampled at first-kind (interior) Chebyshev points so a singular endpoint
// is never evaluated.
class PiecewiseChebyshev {
 public:
  PiecewiseChebyshev() = default;

  // Sample points for `edges` with `order` nodes per panel, panel-major.
  static std::vector<double> nodes(std::span<const double> edges, int order);

  PiecewiseChebyshev(std::vector<double> edges, int order, std::span<const double> values);

  double operator()(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

  // t -> integral from edges.front() to t.
  PiecewiseChebyshev integral_from_left() const;
  // t -> integral from t to edges.back().
  PiecewiseChebyshev integral_to_right() const;

  const std::vector<double>& edges() const noexcept { return edges_; }
  int order() const noexcept { return order_; }
  double front() const { return edges_.front(); }
  double back() const { return edges_.back(); }

 private:
  std::size_t panel_of(double t) const;
  double eval_series(std::span<const double> c, double x) const;

  std::vector<double> edges_;
  int order_ = 0;
  std::vector<double> coeffs_;  // order_ per panel
};

}  // namespace cartwright::numerics

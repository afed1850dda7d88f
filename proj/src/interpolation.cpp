#include "cartwright/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <math.h>  // boost 1.74 pchip calls unqualified isnan

#include <boost/math/interpolators/pchip.hpp>

#include "cartwright/errors.hpp"

namespace cartwright::numerics {

struct MonotoneCubic::Impl {
  boost::math::interpolators::pchip<std::vector<double>> spline;
};

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size() || x.size() < 4) {
    throw DomainError("MonotoneCubic: need at least four matching knots");
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw DomainError("MonotoneCubic: knots must be strictly increasing");
  }
  lo_ = x.front();
  hi_ = x.back();
  impl_ = std::make_shared<const Impl>(
      Impl{boost::math::interpolators::pchip<std::vector<double>>(std::move(x), std::move(y))});
}

double MonotoneCubic::operator()(double x) const {
  if (x < lo_ || x > hi_) throw DomainError("MonotoneCubic: argument outside knot range");
  return impl_->spline(x);
}

double MonotoneCubic::derivative(double x) const {
  if (x < lo_ || x > hi_) throw DomainError("MonotoneCubic: argument outside knot range");
  return impl_->spline.prime(x);
}

std::vector<double> PiecewiseChebyshev::nodes(std::span<const double> edges, int order) {
  std::vector<double> out;
  out.reserve((edges.size() - 1) * order);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double c = 0.5 * (edges[p] + edges[p + 1]);
    const double h = 0.5 * (edges[p + 1] - edges[p]);
    // Ascending order within the panel.
    for (int j = order - 1; j >= 0; --j) {
      out.push_back(c + h * std::cos(std::numbers::pi * (j + 0.5) / order));
    }
  }
  return out;
}

PiecewiseChebyshev::PiecewiseChebyshev(std::vector<double> edges, int order,
                                       std::span<const double> values)
    : edges_(std::move(edges)), order_(order) {
  if (edges_.size() < 2 || order_ < 2) throw DomainError("PiecewiseChebyshev: bad layout");
  const std::size_t panels = edges_.size() - 1;
  if (values.size() != panels * order_) throw DomainError("PiecewiseChebyshev: value count");
  coeffs_.assign(panels * order_, 0.0);
  for (std::size_t p = 0; p < panels; ++p) {
    const double* f = values.data() + p * order_;
    double* c = coeffs_.data() + p * order_;
    for (int k = 0; k < order_; ++k) {
      double s = 0.0;
      for (int j = 0; j < order_; ++j) {
        // values are ascending, node j (descending cos) sits at index order-1-j
        s += f[order_ - 1 - j] * std::cos(std::numbers::pi * k * (j + 0.5) / order_);
      }
      c[k] = 2.0 * s / order_;
    }
    c[0] *= 0.5;
  }
}

std::size_t PiecewiseChebyshev::panel_of(double t) const {
  if (t < edges_.front() || t > edges_.back()) {
    throw DomainError("PiecewiseChebyshev: argument outside panels");
  }
  auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
  std::size_t idx = static_cast<std::size_t>(it - edges_.begin());
  idx = idx == 0 ? 0 : idx - 1;
  return std::min(idx, edges_.size() - 2);
}

double PiecewiseChebyshev::eval_series(std::span<const double> c, double x) const {
  double b1 = 0.0;
  double b2 = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) {
    const double b0 = 2.0 * x * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c[0];
}

double PiecewiseChebyshev::operator()(double t) const {
  const std::size_t p = panel_of(t);
  const double c = 0.5 * (edges_[p] + edges_[p + 1]);
  const double h = 0.5 * (edges_[p + 1] - edges_[p]);
  return eval_series({coeffs_.data() + p * order_, static_cast<std::size_t>(order_)}, (t - c) / h);
}

namespace {

std::vector<double> differentiate(std::span<const double> c) {
  const std::size_t n = c.size();
  std::vector<double> d(n + 1, 0.0);
  for (std::size_t k = n - 1; k >= 1; --k) d[k - 1] = d[k + 1] + 2.0 * k * c[k];
  d[0] *= 0.5;
  d.resize(n);
  return d;
}

}  // namespace

double PiecewiseChebyshev::derivative(double t) const {
  const std::size_t p = panel_of(t);
  const double c = 0.5 * (edges_[p] + edges_[p + 1]);
  const double h = 0.5 * (edges_[p + 1] - edges_[p]);
  const auto d = differentiate({coeffs_.data() + p * order_, static_cast<std::size_t>(order_)});
  return eval_series(d, (t - c) / h) / h;
}

double PiecewiseChebyshev::second_derivative(double t) const {
  const std::size_t p = panel_of(t);
  const double c = 0.5 * (edges_[p] + edges_[p + 1]);
  const double h = 0.5 * (edges_[p + 1] - edges_[p]);
  const auto d1 = differentiate({coeffs_.data() + p * order_, static_cast<std::size_t>(order_)});
  const auto d2 = differentiate(d1);
  return eval_series(d2, (t - c) / h) / (h * h);
}

PiecewiseChebyshev PiecewiseChebyshev::integral_from_left() const {
  PiecewiseChebyshev out;
  out.edges_ = edges_;
  out.order_ = order_;
  out.coeffs_.assign(coeffs_.size(), 0.0);
  double carry = 0.0;
  const std::size_t panels = edges_.size() - 1;
  for (std::size_t p = 0; p < panels; ++p) {
    const double h = 0.5 * (edges_[p + 1] - edges_[p]);
    const double* c = coeffs_.data() + p * order_;
    double* b = out.coeffs_.data() + p * order_;
    // Antiderivative truncated back to `order_` terms; the dropped top
    // coefficient is below the interpolation error of the input.
    for (int k = 1; k < order_; ++k) {
      const double cm = c[k - 1] * (k == 1 ? 2.0 : 1.0);
      const double cp = (k + 1 < order_) ? c[k + 1] : 0.0;
      b[k] = h * (cm - cp) / (2.0 * k);
    }
    // Fix the constant so the panel starts at `carry`: F(-1) = sum b_k (-1)^k.
    double at_left = 0.0;
    for (int k = 1; k < order_; ++k) at_left += (k % 2 == 0 ? 1.0 : -1.0) * b[k];
    b[0] = carry - at_left;
    double at_right = 0.0;
    for (int k = 0; k < order_; ++k) at_right += b[k];
    carry = at_right;
  }
  return out;
}

PiecewiseChebyshev PiecewiseChebyshev::integral_to_right() const {
  // Accumulated panel by panel from the right so small tails keep their
  // relative accuracy.
  PiecewiseChebyshev out;
  out.edges_ = edges_;
  out.order_ = order_;
  out.coeffs_.assign(coeffs_.size(), 0.0);
  double carry = 0.0;
  const std::size_t panels = edges_.size() - 1;
  for (std::size_t p = panels; p-- > 0;) {
    const double h = 0.5 * (edges_[p + 1] - edges_[p]);
    const double* c = coeffs_.data() + p * order_;
    double* b = out.coeffs_.data() + p * order_;
    for (int k = 1; k < order_; ++k) {
      const double cm = c[k - 1] * (k == 1 ? 2.0 : 1.0);
      const double cp = (k + 1 < order_) ? c[k + 1] : 0.0;
      b[k] = -h * (cm - cp) / (2.0 * k);
    }
    double at_right = 0.0;
    for (int k = 1; k < order_; ++k) at_right += b[k];
    b[0] = carry - at_right;
    double at_left = 0.0;
    for (int k = 0; k < order_; ++k) at_left += (k % 2 == 0 ? 1.0 : -1.0) * b[k];
    carry = at_left;
  }
  return out;
}

}  // namespace cartwright::numerics

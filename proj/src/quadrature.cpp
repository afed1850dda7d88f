#include "cartwright/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cartwright/errors.hpp"
#include "cartwright/simd_kernels.hpp"

namespace cartwright::numerics {

namespace {

constexpr int kNodes = 21;

// Kronrod nodes on [-1, 1] with Kronrod weights and the embedded Gauss
// weights (zero where a Kronrod node is not a Gauss node).
struct Rule {
  std::array<double, kNodes> x{};
  std::array<double, kNodes> wk{};
  std::array<double, kNodes> wg{};
};

const Rule& rule() {
  static const Rule r = [] {
    using K = boost::math::quadrature::gauss_kronrod<double, 21>;
    using G = boost::math::quadrature::gauss<double, 10>;
    const auto& ka = K::abscissa();
    const auto& kw = K::weights();
    const auto& ga = G::abscissa();
    const auto& gw = G::weights();
    Rule out;
    int idx = 0;
    for (std::size_t i = 0; i < ka.size(); ++i) {
      double gauss_weight = 0.0;
      for (std::size_t j = 0; j < ga.size(); ++j) {
        if (std::abs(ga[j] - ka[i]) < 1e-14) gauss_weight = gw[j];
      }
      if (ka[i] == 0.0) {
        out.x[idx] = 0.0;
        out.wk[idx] = kw[i];
        out.wg[idx] = gauss_weight;
        ++idx;
      } else {
        for (double sign : {-1.0, 1.0}) {
          out.x[idx] = sign * ka[i];
          out.wk[idx] = kw[i];
          out.wg[idx] = gauss_weight;
          ++idx;
        }
      }
    }
    return out;
  }();
  return r;
}

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
  int depth;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel evaluate_panel(const BatchIntegrand& f, double lo, double hi, int depth) {
  const Rule& r = rule();
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  std::array<double, kNodes> x{};
  std::array<double, kNodes> fx{};
  for (int i = 0; i < kNodes; ++i) x[i] = c + h * r.x[i];
  f(x, fx);
  const double k = h * simd::dot(r.wk, fx);
  const double g = h * simd::dot(r.wg, fx);
  double resabs = 0.0;
  for (int i = 0; i < kNodes; ++i) resabs += r.wk[i] * std::abs(fx[i]);
  resabs *= std::abs(h);
  double err = std::abs(k - g);
  // Roundoff floor: nothing below this is resolvable.
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * resabs);
  if (!std::isfinite(k)) err = std::numeric_limits<double>::infinity();
  return Panel{lo, hi, k, err, depth};
}

}  // namespace

QuadResult integrate(const BatchIntegrand& f, std::span<const double> breakpoints,
                     const QuadConfig& cfg) {
  if (breakpoints.size() < 2) throw DomainError("integrate: need at least two breakpoints");
  std::priority_queue<Panel> queue;
  std::vector<Panel> frozen;
  double total = 0.0;
  double total_err = 0.0;
  int panels = 0;
  const int split = std::max(1, cfg.initial_split);
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b > a)) continue;
    for (int s = 0; s < split; ++s) {
      const double lo = a + (b - a) * s / split;
      const double hi = (s + 1 == split) ? b : a + (b - a) * (s + 1) / split;
      Panel p = evaluate_panel(f, lo, hi, 0);
      total += p.value;
      total_err += p.error;
      ++panels;
      queue.push(p);
    }
  }
  double previous = total;
  auto tolerance = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };
  while (total_err > tolerance()) {
    if (queue.empty()) {
      throw AccuracyError("integrate: subdivision depth exhausted", total, previous);
    }
    if (panels >= cfg.max_panels) {
      throw AccuracyError("integrate: panel budget exhausted", total, previous);
    }
    Panel worst = queue.top();
    queue.pop();
    if (worst.depth >= cfg.max_depth) {
      frozen.push_back(worst);
      continue;
    }
    const double mid = 0.5 * (worst.lo + worst.hi);
    Panel left = evaluate_panel(f, worst.lo, mid, worst.depth + 1);
    Panel right = evaluate_panel(f, mid, worst.hi, worst.depth + 1);
    previous = total;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    ++panels;
    queue.push(left);
    queue.push(right);
  }
  if (!std::isfinite(total)) throw AccuracyError("integrate: non-finite integral", total, previous);
  // Re-sum to shed the drift of incremental updates.
  double sum = 0.0;
  double err = 0.0;
  for (const Panel& p : frozen) {
    sum += p.value;
    err += p.error;
  }
  while (!queue.empty()) {
    sum += queue.top().value;
    err += queue.top().error;
    queue.pop();
  }
  return QuadResult{sum, err, panels};
}

QuadResult integrate(const ScalarIntegrand& f, std::span<const double> breakpoints,
                     const QuadConfig& cfg) {
  BatchIntegrand batch = [&f](std::span<const double> x, std::span<double> fx) {
    for (std::size_t i = 0; i < x.size(); ++i) fx[i] = f(x[i]);
  };
  return integrate(batch, breakpoints, cfg);
}

QuadResult integrate(const ScalarIntegrand& f, double lo, double hi, const QuadConfig& cfg) {
  const std::array<double, 2> bp{lo, hi};
  return integrate(f, bp, cfg);
}

std::vector<double> merge_breakpoints(std::vector<double> points, double lo, double hi) {
  points.push_back(lo);
  points.push_back(hi);
  std::vector<double> out;
  for (double p : points) {
    if (std::isfinite(p) && p >= lo && p <= hi) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  const double eps = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi));
  std::vector<double> unique;
  for (double p : out) {
    if (unique.empty() || p - unique.back() > eps) unique.push_back(p);
  }
  if (unique.back() != hi) unique.back() = hi;
  return unique;
}

std::vector<double> graded_breakpoints(double lo, double hi, double center, double scale) {
  std::vector<double> pts{lo, hi};
  if (!(scale > 0.0) || !std::isfinite(scale)) return merge_breakpoints(pts, lo, hi);
  if (center > lo && center < hi) pts.push_back(center);
  const double span = hi - lo;
  for (double step = scale; step < span; step *= 2.0) {
    pts.push_back(center - step);
    pts.push_back(center + step);
  }
  return merge_breakpoints(std::move(pts), lo, hi);
}

GradedResult integrate_graded_at_zero(const ScalarIntegrand& f, double hi, const QuadConfig& cfg,
                                      int max_levels) {
  GradedResult out;
  double sum = 0.0;
  double prev_piece = 0.0;
  int nondecreasing = 0;
  int stable = 0;
  double prev_estimate = std::numeric_limits<double>::quiet_NaN();
  double upper = hi;
  for (int level = 0; level < max_levels; ++level) {
    const double lower = 0.5 * upper;
    double piece = 0.0;
    try {
      piece = integrate(f, lower, upper, cfg).value;
    } catch (const AccuracyError&) {
      // An unresolvable panel near the singularity reads as divergence when
      // the previous pieces were already growing.
      if (nondecreasing > 0) {
        out.divergent = true;
        out.value = std::numeric_limits<double>::infinity();
        out.panels = level;
        return out;
      }
      throw;
    }
    if (!std::isfinite(piece)) {
      out.divergent = true;
      out.value = std::numeric_limits<double>::infinity();
      out.panels = level;
      return out;
    }
    sum += piece;
    out.panels = level + 1;
    if (level > 0 && prev_piece != 0.0) {
      const double ratio = piece / prev_piece;
      if (ratio >= 0.999) {
        ++nondecreasing;
      } else {
        nondecreasing = 0;
      }
      if (nondecreasing >= 8) {
        out.divergent = true;
        out.value = std::numeric_limits<double>::infinity();
        return out;
      }
      if (ratio > 0.0 && ratio < 0.999) {
        const double tail = piece * ratio / (1.0 - ratio);
        const double estimate = sum + tail;
        const double tol = std::max(0.1 * cfg.rel_tol * std::abs(estimate), cfg.abs_tol);
        // Either the tail is negligible or the geometric extrapolation has
        // settled (pure power laws settle at once).
        stable = std::abs(estimate - prev_estimate) <= tol ? stable + 1 : 0;
        prev_estimate = estimate;
        if (std::abs(tail) <= tol || stable >= 3) {
          out.value = estimate;
          out.tail = tail;
          return out;
        }
      } else {
        stable = 0;
      }
    }
    if (level > 0 && piece == 0.0 && prev_piece == 0.0) {
      out.value = sum;
      return out;
    }
    prev_piece = piece;
    upper = lower;
  }
  throw AccuracyError("integrate_graded_at_zero: no convergence or divergence verdict", sum,
                      sum - prev_piece);
}

}  // namespace cartwright::numerics

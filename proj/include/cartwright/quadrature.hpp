#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cartwright::numerics {

struct QuadConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_depth = 20;        // bisection levels below an initial panel
  int max_panels = 6000;
  int initial_split = 1;     // each breakpoint interval is first cut into this many panels
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

// Fills fx[i] = f(x[i]). Called with one panel's 21 Kronrod nodes at a time.
using BatchIntegrand = std::function<void(std::span<const double> x, std::span<double> fx)>;
using ScalarIntegrand = std::function<double(double)>;

// Globally adaptive 21-point Gauss-Kronrod over the union of the intervals
// defined by `breakpoints` (sorted, at least two entries). Throws
// AccuracyError with the last two totals when the budget runs out.
QuadResult integrate(const BatchIntegrand& f, std::span<const double> breakpoints,
                     const QuadConfig& cfg = {});
QuadResult integrate(const ScalarIntegrand& f, std::span<const double> breakpoints,
                     const QuadConfig& cfg = {});
QuadResult integrate(const ScalarIntegrand& f, double lo, double hi, const QuadConfig& cfg = {});

// Breakpoints in [lo, hi] clustering geometrically at `center` with
// innermost spacing `scale`: center +- scale * 2^k, plus lo and hi. The
// center itself is included when it lies inside.
std::vector<double> graded_breakpoints(double lo, double hi, double center, double scale);

// Merge, clip to [lo, hi], sort and deduplicate.
std::vector<double> merge_breakpoints(std::vector<double> points, double lo, double hi);

struct GradedResult {
  double value = 0.0;
  bool divergent = false;
  int panels = 0;
  double tail = 0.0;  // extrapolated contribution of (0, last panel)
};

// Integral over (0, hi] of a function that may be singular at 0, on dyadic
// panels [hi 2^-(j+1), hi 2^-j]. The unresolved remainder is extrapolated
// geometrically from the last panel ratio; a panel ratio that stops
// decreasing below one flags divergence.
GradedResult integrate_graded_at_zero(const ScalarIntegrand& f, double hi,
                                      const QuadConfig& cfg = {}, int max_levels = 600);

}  // namespace cartwright::numerics

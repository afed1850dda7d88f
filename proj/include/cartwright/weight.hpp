#pragma once

// Majorant weights w: (0,1] -> (0, inf), decreasing, normalized so that
// w(1) = 1. Everything is evaluated in the log domain: exp(1/y) overflows
// long before the interesting range of y.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cartwright/ball_geometry.hpp"

namespace cartwright::weights {

enum class Family { power, power_log, exp_inv, threshold, theorem2, shifted_power, patched, user };

std::string family_name(Family f);

class Weight {
 public:
  // y^(-p)
  static Weight power(double p);
  // y^(-p) (1 + |log y|)^q
  static Weight power_log(double p, double q);
  // exp(a/y) / exp(a)
  static Weight exp_inv(double a);
  // y^(-n): the borderline growth
  static Weight threshold(ball::Dimension n);
  // y^(-n) (1 + |log y|^(n+1))
  static Weight theorem2(ball::Dimension n);
  // c (y+b)^s, rescaled to w(1) = 1; needs y + b > 0 on (0, 1]
  static Weight shifted_power(double c, double b, double s);
  // Arbitrary positive function; missing derivatives are replaced by
  // central differences.
  static Weight from_functions(std::function<double(double)> w,
                               std::function<double(double)> dw = {},
                               std::function<double(double)> d2w = {}, std::string label = "user");

  double operator()(double y) const;     // w(y); may overflow to inf
  double log_value(double y) const;      // log w(y)
  double derivative(double y) const;     // w'(y)
  double log_slope(double y) const;      // w'/w
  double ratio_slope(double y) const;    // (w/w')'

  // psi(t) = log w(e^-t) and its first two derivatives in t.
  double psi(double t) const { return log_value(std::exp(-t)); }
  double psi_prime(double t) const;
  double psi_second(double t) const;

  Family family() const noexcept { return family_; }
  const std::map<std::string, double>& parameters() const noexcept { return params_; }
  std::string describe() const;
  // Factor the raw family expression was multiplied by to get w(1) = 1.
  double normalization() const noexcept { return normalization_; }
  bool closed_form() const noexcept { return family_ != Family::user; }

  // Only meaningful for patched weights.
  double patch_point() const noexcept { return patch_point_; }

 private:
  friend Weight patch_weight(const Weight& w, double y0);
  struct Impl {
    std::function<double(double)> log_w;
    std::function<double(double)> log_slope;
    std::function<double(double)> ratio_slope;
  };
  Weight(Family f, std::map<std::string, double> params, std::shared_ptr<const Impl> impl,
         double normalization);

  Family family_;
  std::map<std::string, double> params_;
  std::shared_ptr<const Impl> impl_;
  double normalization_ = 1.0;
  double patch_point_ = 0.0;
  std::string label_;
};

// Log-spaced grid, increasing.
std::vector<double> default_grid(int points = 200, double lo = 1e-6, double hi = 1.0);

// -w(theta) / (10 w'(theta)).
double alpha(const Weight& w, double theta);

struct RipponIntegral {
  double value = 0.0;
  bool divergent = false;
};

// integral_0^1 (w(t)/t)^(1/(n+1)) dt.
RipponIntegral rippon_integral(ball::Dimension n, const Weight& w);

struct PolyGrowth {
  double N = 0.0;        // sup of -y w'/w
  double epsilon = 0.0;  // inf of -y w'/w, minus n
  bool holds = false;    // epsilon > 0
};

enum class BorichevClass { polynomial, rapid, neither };
std::string borichev_name(BorichevClass c);

struct RegularityReport {
  bool als_pass = false;
  double als_sup = 0.0;            // sup |w/w'| over the lowest grid decade
  double ar_delta = 0.0;           // over the whole grid
  double ar_delta_near0 = 0.0;     // over grid points y <= near0_y0
  double near0_y0 = 0.1;
  double min_ratio_slope = 0.0;
  double argmin_ratio_slope = 0.0;
  std::optional<PolyGrowth> poly_growth;
  RipponIntegral rippon;
  BorichevClass borichev = BorichevClass::neither;
  double borichev_fit_slope = 0.0;  // log|psi''| vs log psi' on t in [5, 25]
  double borichev_limit = 0.0;      // extrapolated lim psi'
  std::vector<double> grid;
  std::vector<double> ratio_slope_samples;
};

RegularityReport check_conditions(ball::Dimension n, const Weight& w,
                                  const std::vector<double>& grid = default_grid());

struct DoublingCheck {
  double alpha = 0.0;
  bool pass_quarter = false;
  bool pass_doubling = false;
  double ratio = 0.0;  // w(theta - 2 alpha) / w(theta)
};

DoublingCheck verify_lemma_doubling(const Weight& w, double theta);

struct WeightedIntegralCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  // Both sides divided by w(theta)^(1/(n+1)); finite even when w(theta) is not.
  double lhs_normalized = 0.0;
  double rhs_normalized = 0.0;
  bool pass = false;
};

WeightedIntegralCheck verify_weighted_integral_bound(ball::Dimension n, const Weight& w,
                                                     double theta, double delta);

// Replace w on [y1, 1] by c (y+b)^s matched to second order at y1 <= y0.
Weight patch_weight(const Weight& w, double y0);

// "family=power p=4", "family=exp_inv a=1 patch=0.5", ...
Weight parse_weight_spec(const std::string& spec, ball::Dimension n);

}  // namespace cartwright::weights

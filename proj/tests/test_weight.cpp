#include "doctest.h"

#include <cmath>
#include <random>

#include "cartwright/errors.hpp"
#include "cartwright/weight.hpp"

using namespace cartwright;
using namespace cartwright::weights;
using ball::Dimension;

namespace {

// Richardson-extrapolated central difference, independent of the library.
double fd(const std::function<double(double)>& f, double x, double h) {
  const double d1 = (f(x + h) - f(x - h)) / (2 * h);
  const double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

std::vector<Weight> builtin(Dimension n) {
  return {Weight::power(2.0 * n), Weight::power(n + 0.5), Weight::power_log(n + 1.0, 2.0),
          Weight::exp_inv(1.0), Weight::exp_inv(0.3), Weight::theorem2(n),
          Weight::shifted_power(2.0, 0.1, -3.0)};
}

}  // namespace

TEST_CASE("normalization and growth of the built-in families") {
  for (int nn = 1; nn <= 3; ++nn) {
    for (const auto& w : builtin(Dimension(nn))) {
      CAPTURE(w.describe());
      CHECK(w(1.0) == doctest::Approx(1.0).epsilon(1e-14));
      if (w.family() != Family::shifted_power) CHECK(w(1e-6) > 1e3);
      for (double y : default_grid(60)) CHECK(w.derivative(y) < 0.0);
    }
  }
  CHECK(Weight::exp_inv(1.0).normalization() == doctest::Approx(std::exp(-1.0)));
  CHECK(Weight::shifted_power(2.0, 0.1, -3.0).normalization() ==
        doctest::Approx(1.0 / (2.0 * std::pow(1.1, -3.0))));
}

TEST_CASE("closed-form derivatives agree with finite differences") {
  for (int nn = 1; nn <= 3; ++nn) {
    for (const auto& w : builtin(Dimension(nn))) {
      CAPTURE(w.describe());
      for (double y : {1e-4, 3e-3, 0.05, 0.3, 0.9}) {
        const double h = 1e-3 * y;
        const double slope = fd([&](double x) { return w.log_value(x); }, y, h);
        CHECK(w.log_slope(y) == doctest::Approx(slope).epsilon(1e-7));
        const double ratio = fd([&](double x) { return 1.0 / w.log_slope(x); }, y, h);
        CHECK(std::abs(w.ratio_slope(y) - ratio) <= 1e-7 * std::max(1.0, std::abs(ratio)));
      }
    }
  }
}

TEST_CASE("user weights fall back to finite differences") {
  const auto user = Weight::from_functions([](double y) { return 5.0 * std::pow(y, -3.0); });
  const auto ref = Weight::power(3.0);
  CHECK(user.normalization() == doctest::Approx(0.2));
  for (double y : {1e-5, 1e-2, 0.5}) {
    CHECK(user.log_value(y) == doctest::Approx(ref.log_value(y)).epsilon(1e-12));
    CHECK(user.log_slope(y) == doctest::Approx(ref.log_slope(y)).epsilon(1e-8));
    CHECK(user.ratio_slope(y) == doctest::Approx(ref.ratio_slope(y)).epsilon(1e-5));
  }
  const auto exact = Weight::from_functions([](double y) { return std::pow(y, -3.0); },
                                            [](double y) { return -3.0 * std::pow(y, -4.0); },
                                            [](double y) { return 12.0 * std::pow(y, -5.0); });
  CHECK(exact.ratio_slope(0.2) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  const auto rough = Weight::from_functions(
      [](double y) { return std::pow(y, -3.0) * (1.0 + 1e-6 * std::sin(1e4 * y)); });
  CHECK_THROWS_AS(rough.ratio_slope(0.3), AccuracyError);
}

TEST_CASE("alpha") {
  CHECK(alpha(Weight::power(3.0), 0.3) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(alpha(Weight::exp_inv(1.0), 0.2) == doctest::Approx(0.004).epsilon(1e-14));
  CHECK(alpha(Weight::threshold(Dimension(1)), 0.2) == doctest::Approx(0.02));
  CHECK(alpha(Weight::power(2.0), 0.2) == doctest::Approx(0.01).epsilon(1e-14));
  const auto flat = Weight::from_functions([](double) { return 1.0; }, [](double) { return 0.0; });
  CHECK_THROWS_AS(alpha(flat, 0.2), MonotonicityError);
  CHECK_THROWS_AS(alpha(Weight::power(2.0), 1.0), DomainError);
}

TEST_CASE("check_conditions on power weights") {
  for (int nn = 1; nn <= 3; ++nn) {
    const Dimension n(nn);
    for (double p : {nn + 0.5, 2.0 * nn, 3.0 * nn}) {
      const auto rep = check_conditions(n, Weight::power(p));
      CHECK(rep.ar_delta == doctest::Approx(1.0 - nn / p).epsilon(1e-12));
      CHECK(rep.ar_delta_near0 == doctest::Approx(1.0 - nn / p).epsilon(1e-12));
      CHECK(rep.als_pass);
      REQUIRE(rep.poly_growth.has_value());
      CHECK(rep.poly_growth->N == doctest::Approx(p));
      CHECK(rep.poly_growth->epsilon == doctest::Approx(p - nn));
      CHECK(rep.borichev == BorichevClass::polynomial);
      CHECK(rep.rippon.divergent);
    }
    const auto edge = check_conditions(n, Weight::threshold(n));
    CHECK(edge.ar_delta == 0.0);
    CHECK(edge.borichev == BorichevClass::neither);
    CHECK(edge.rippon.divergent);
  }
}

TEST_CASE("check_conditions on exp_inv against the symbolic (w/w')' = -2y") {
  const Dimension n(2);
  const auto rep = check_conditions(n, Weight::exp_inv(1.0));
  CHECK(rep.als_pass);
  for (std::size_t i = 0; i < rep.grid.size(); ++i) {
    CHECK(rep.ratio_slope_samples[i] == doctest::Approx(-2.0 * rep.grid[i]).epsilon(1e-14));
  }
  // Global sup is taken at y = 1: 1 - 2n < 0 clips to zero; the near-zero
  // verdict approaches one.
  CHECK(rep.ar_delta == 0.0);
  double top = 0.0;
  for (double y : rep.grid) if (y <= 0.1) top = y;
  CHECK(rep.ar_delta_near0 == doctest::Approx(1.0 - 2.0 * 2 * top).epsilon(1e-12));
  const auto fine = check_conditions(n, Weight::exp_inv(1.0), default_grid(200, 1e-6, 1e-3));
  CHECK(fine.ar_delta > 0.995);
  CHECK_FALSE(rep.poly_growth.has_value());
  CHECK(rep.borichev == BorichevClass::rapid);
  CHECK(rep.borichev_fit_slope == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("check_conditions rejects bad grids and increasing weights") {
  CHECK_THROWS_AS(check_conditions(Dimension(1), Weight::power(2), default_grid(20)), DomainError);
  const auto up = Weight::from_functions([](double y) { return 1.0 + y; });
  CHECK_THROWS_AS(check_conditions(Dimension(1), up), MonotonicityError);
}

TEST_CASE("borichev classes of the log-corrected weights") {
  CHECK(check_conditions(Dimension(2), Weight::theorem2(Dimension(2))).borichev ==
        BorichevClass::neither);
  const auto rep = check_conditions(Dimension(2), Weight::power_log(3.0, 2.0));
  CHECK(rep.borichev == BorichevClass::polynomial);
  CHECK(rep.borichev_limit == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("rippon integral closed forms") {
  for (int nn = 1; nn <= 3; ++nn) {
    const Dimension n(nn);
    const auto one = Weight::from_functions([](double) { return 1.0; });
    CHECK(rippon_integral(n, one).value == doctest::Approx((nn + 1.0) / nn).epsilon(1e-8));
    for (double a : {0.5 * nn, 0.25 * nn, 0.9 * nn}) {
      const auto r = rippon_integral(n, Weight::power(a));
      CHECK_FALSE(r.divergent);
      CHECK(r.value == doctest::Approx((nn + 1.0) / (nn - a)).epsilon(1e-7));
    }
    CHECK(rippon_integral(n, Weight::power(nn)).divergent);
    CHECK(rippon_integral(n, Weight::power(nn + 1.0)).divergent);
  }
}

TEST_CASE("rippon integral is monotone and dominates the weight") {
  const Dimension n(2);
  std::vector<Weight> ws{Weight::power(0.5), Weight::power(1.0), Weight::power_log(1.0, 1.0),
                         Weight::power(1.5)};
  std::vector<double> vals;
  for (const auto& w : ws) vals.push_back(rippon_integral(n, w).value);
  for (std::size_t i = 0; i + 1 < ws.size(); ++i) CHECK(vals[i] <= vals[i + 1] + 1e-9);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    for (double y : default_grid(50)) {
      CHECK(ws[i].log_value(y) <= 3.0 * std::log(vals[i]) - 2.0 * std::log(y) + 1e-12);
    }
  }
}

TEST_CASE("doubling lemma examples") {
  const auto a = verify_lemma_doubling(Weight::power(2.0), 0.4);
  CHECK(a.alpha == doctest::Approx(0.02));
  CHECK(a.ratio == doctest::Approx(1.0 / 0.81).epsilon(1e-12));
  CHECK(a.pass_quarter);
  CHECK(a.pass_doubling);
  const auto b = verify_lemma_doubling(Weight::exp_inv(1.0), 0.1);
  CHECK(b.alpha == doctest::Approx(0.001));
  CHECK(b.ratio == doctest::Approx(std::exp(1.0 / 0.098 - 10.0)).epsilon(1e-12));
  CHECK(b.pass_doubling);
  for (double p : {0.4, 1.0, 7.0}) CHECK(verify_lemma_doubling(Weight::power(p), 0.3).pass_quarter);
  // alpha = theta/(10 p) with p tiny makes theta - 2 alpha negative.
  CHECK_THROWS_AS(verify_lemma_doubling(Weight::power(0.1), 0.3), DomainError);
}

TEST_CASE("alpha properties under the regularity condition") {
  for (int nn = 1; nn <= 3; ++nn) {
    const Dimension n(nn);
    for (const auto& w : builtin(n)) {
      const auto rep = check_conditions(n, w, default_grid(200, 1e-6, 0.5));
      if (rep.ar_delta <= 0.0 || !rep.als_pass) continue;
      CAPTURE(w.describe());
      for (double th : default_grid(40, 1e-5, 0.5)) {
        const double al = alpha(w, th);
        CHECK(al > 0.0);
        CHECK(th - 2 * al > th / 2);
        if (th < 0.49) {
          const double dal = fd([&](double x) { return alpha(w, x); }, th, 1e-4 * th);
          CHECK(dal <= (1.0 - rep.ar_delta) / (10.0 * nn) + 1e-8);
        }
      }
    }
  }
}

TEST_CASE("weighted integral bound") {
  for (int nn = 1; nn <= 2; ++nn) {
    const Dimension n(nn);
    const auto w = Weight::power(2.0 * nn);
    const double delta = check_conditions(n, w).ar_delta;
    for (double th : {1e-3, 1e-2, 0.1, 0.5}) {
      const auto r = verify_weighted_integral_bound(n, w, th, delta);
      CHECK(r.pass);
      CHECK(r.lhs > 0.0);
      CHECK(std::isfinite(r.lhs));
    }
  }
  const auto e = Weight::exp_inv(1.0);
  const double delta = check_conditions(Dimension(1), e).ar_delta_near0;
  const auto r = verify_weighted_integral_bound(Dimension(1), e, 0.05, delta);
  MESSAGE("exp_inv theta=0.05 slack rhs/lhs = " << r.rhs_normalized / r.lhs_normalized);
  CHECK(r.pass);
  CHECK_THROWS_AS(verify_weighted_integral_bound(Dimension(1), e, 0.05, 0.0), DomainError);
}

TEST_CASE("patching a weight away from zero") {
  const auto sp = Weight::shifted_power(3.0, 0.2, -2.5);
  const auto same = patch_weight(sp, 0.4);
  for (double y : {1e-4, 0.1, 0.4, 0.7, 1.0}) {
    CHECK(same.log_value(y) == doctest::Approx(sp.log_value(y)).epsilon(1e-12));
  }
  for (int nn = 1; nn <= 3; ++nn) {
    const Dimension n(nn);
    const auto p = patch_weight(Weight::power(2.0 * nn), 0.5);
    CHECK(check_conditions(n, p).ar_delta >= 0.5 - 1e-12);
  }
  // exp_inv fails the global condition; the patch repairs it.
  const auto e = patch_weight(Weight::exp_inv(1.0), 0.1);
  const double y1 = e.patch_point();
  CHECK(y1 == doctest::Approx(0.1));
  CHECK(std::abs(std::exp(e.log_value(y1 * (1 - 1e-15))) - std::exp(e.log_value(y1 * (1 + 1e-15)))) <
        1e-10 * std::exp(e.log_value(y1)));
  CHECK(e.log_slope(y1 * (1 - 1e-12)) == doctest::Approx(e.log_slope(y1 * (1 + 1e-12))).epsilon(1e-9));
  CHECK(e(1.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(check_conditions(Dimension(2), e).ar_delta > 0.5);
  const auto up = Weight::from_functions([](double y) { return std::exp(-y * y); });
  CHECK_THROWS_AS(patch_weight(up, 0.5), std::exception);
}

TEST_CASE("weight spec grammar") {
  const Dimension n(2);
  CHECK(parse_weight_spec("family=power p=4", n).family() == Family::power);
  CHECK(parse_weight_spec("family=exp_inv a=1", n)(0.5) == doctest::Approx(std::exp(1.0)));
  CHECK(parse_weight_spec("family=threshold", n).log_slope(0.5) == doctest::Approx(-4.0));
  CHECK(parse_weight_spec("family=theorem2", n).family() == Family::theorem2);
  CHECK(parse_weight_spec("family=power_log p=3 q=2", n).parameters().at("q") == 2.0);
  CHECK(parse_weight_spec("family=shifted_power c=1 b=0.5 s=-3", n).family() ==
        Family::shifted_power);
  CHECK(parse_weight_spec("family=exp_inv a=1 patch=0.2", n).family() == Family::patched);
  CHECK_THROWS_AS(parse_weight_spec("family=cubic", n), UsageError);
  CHECK_THROWS_AS(parse_weight_spec("family=power", n), UsageError);
  CHECK_THROWS_AS(parse_weight_spec("family=power p=four", n), UsageError);
  CHECK_THROWS_AS(parse_weight_spec("family=power p=4 q=1", n), UsageError);
  CHECK_THROWS_AS(parse_weight_spec("power", n), UsageError);
  try {
    parse_weight_spec("family=power p=4 junk", n);
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("junk") != std::string::npos);
  }
}

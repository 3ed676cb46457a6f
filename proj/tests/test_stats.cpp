#include <cmath>
#include <functional>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "mapnav/stats.hpp"

using namespace mapnav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Adaptive Simpson quadrature, used as an independent check of the continued
// fraction. Only called with smooth integrands (shape parameters >= 1).
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fb, double fm, double whole, double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson_rec(f, a, m, fa, fm, flm, left, eps / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, fb, frm, right, eps / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double eps) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fb, fm, whole, eps, 40);
}

double beta_by_quadrature(double a, double b, double x) {
  double lognorm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  auto f = [&](double t) {
    if (t <= 0.0 || t >= 1.0) {
      // Endpoint values for shape >= 1; zero unless the exponent vanishes.
      double v = 1.0;
      if (a > 1.0 && t <= 0.0) v = 0.0;
      if (b > 1.0 && t >= 1.0) v = 0.0;
      return v * std::exp(lognorm);
    }
    return std::exp(lognorm + (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t));
  };
  return integrate(f, 0.0, x, 1e-13);
}

}  // namespace

TEST_CASE("unequal-variance t test matches published reference results") {
  // Reference statistics computed with an independent implementation and
  // frozen here to full double precision.
  SECTION("two binary samples, 48/50 vs 30/50") {
    std::vector<double> a(50, 1.0), b(50, 1.0);
    a[48] = a[49] = 0.0;
    for (int i = 30; i < 50; ++i) b[static_cast<size_t>(i)] = 0.0;
    WelchResult r = welch_t_test(a, b);
    CHECK_THAT(r.t, WithinRel(4.77601767454709, 1e-12));
    CHECK_THAT(r.dof, WithinRel(64.2886115444618, 1e-12));
    CHECK_THAT(r.p, WithinRel(1.07424408482941e-05, 1e-10));
    CHECK_THAT(r.mean_a, WithinAbs(0.96, 1e-15));
  }
  SECTION("short uneven binary samples") {
    std::vector<double> a{1, 1, 0, 1, 0, 1, 1, 1};
    std::vector<double> b{0, 1, 0, 0, 1, 0};
    WelchResult r = welch_t_test(a, b);
    CHECK_THAT(r.t, WithinRel(1.56119374367581, 1e-12));
    CHECK_THAT(r.dof, WithinRel(10.197272790981, 1e-12));
    CHECK_THAT(r.p, WithinRel(0.148951568161256, 1e-10));
  }
  SECTION("small real-valued samples") {
    std::vector<double> a{2.1, 2.5, 2.3, 2.9, 3.1, 2.2};
    std::vector<double> b{1.9, 2.0, 2.4, 1.8, 2.1};
    WelchResult r = welch_t_test(a, b);
    CHECK_THAT(r.t, WithinRel(2.4600387132225, 1e-12));
    CHECK_THAT(r.dof, WithinRel(8.13422752330703, 1e-12));
    CHECK_THAT(r.p, WithinRel(0.0388432847877044, 1e-10));
  }
  SECTION("antisymmetry in the argument order") {
    std::vector<double> a{2.1, 2.5, 2.3, 2.9, 3.1, 2.2};
    std::vector<double> b{1.9, 2.0, 2.4, 1.8, 2.1};
    WelchResult ab = welch_t_test(a, b);
    WelchResult ba = welch_t_test(b, a);
    CHECK_THAT(ab.t, WithinAbs(-ba.t, 1e-12));
    CHECK_THAT(ab.p, WithinRel(ba.p, 1e-12));
    CHECK_THAT(ab.dof, WithinRel(ba.dof, 1e-12));
  }
  SECTION("identical means give p near one") {
    std::vector<double> a{1, 2, 3, 4};
    std::vector<double> b{2, 3, 1, 4};
    WelchResult r = welch_t_test(a, b);
    CHECK_THAT(r.t, WithinAbs(0.0, 1e-15));
    CHECK_THAT(r.p, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("t tail probabilities against closed forms") {
  // One and two degrees of freedom have elementary antiderivatives.
  for (double t : {0.0, 0.3, 1.0, 1.96, 3.5, 10.0, 80.0}) {
    CHECK_THAT(student_t_two_sided_p(t, 1.0),
               WithinRel(1.0 - 2.0 / M_PI * std::atan(t), 1e-12));
    CHECK_THAT(student_t_two_sided_p(t, 2.0),
               WithinRel(1.0 - t / std::sqrt(t * t + 2.0), 1e-12));
    CHECK(student_t_two_sided_p(-t, 1.0) == student_t_two_sided_p(t, 1.0));
  }
  SECTION("limits") {
    CHECK(student_t_two_sided_p(0.0, 7.0) == 1.0);
    CHECK(student_t_two_sided_p(std::numeric_limits<double>::infinity(), 3.0) == 0.0);
    CHECK(student_t_two_sided_p(1e8, 5.0) < 1e-30);
  }
  SECTION("large dof approaches the normal tail") {
    CHECK_THAT(student_t_two_sided_p(1.96, 1e7), WithinAbs(normal_two_sided_p(1.96), 1e-6));
  }
}

TEST_CASE("incomplete beta elementary identities") {
  for (double x : {0.01, 0.2, 0.5, 0.77, 0.99}) {
    for (double b : {0.5, 1.0, 2.5, 7.0}) {
      CHECK_THAT(regularized_incomplete_beta(1.0, b, x),
                 WithinRel(1.0 - std::pow(1.0 - x, b), 1e-12));
      CHECK_THAT(regularized_incomplete_beta(b, 1.0, x), WithinRel(std::pow(x, b), 1e-12));
    }
    CHECK_THAT(regularized_incomplete_beta(0.5, 0.5, x),
               WithinRel(2.0 / M_PI * std::asin(std::sqrt(x)), 1e-12));
  }
  SECTION("mirror symmetry") {
    for (double a : {0.5, 1.5, 4.0, 20.0}) {
      for (double b : {0.7, 2.0, 11.0}) {
        for (double x : {0.1, 0.35, 0.8}) {
          double lhs = regularized_incomplete_beta(a, b, x);
          double rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
          CHECK_THAT(lhs, WithinAbs(rhs, 1e-13));
        }
      }
    }
  }
  SECTION("frozen high precision spot values") {
    CHECK_THAT(regularized_incomplete_beta(0.5, 0.5, 0.3),
               WithinRel(0.36901011956554538, 1e-13));
    CHECK_THAT(regularized_incomplete_beta(2.5, 7.0, 0.2),
               WithinRel(0.36749651990402304, 1e-13));
    CHECK_THAT(regularized_incomplete_beta(32.0, 0.5, 0.97),
               WithinRel(0.16429331993646877, 1e-13));
  }
  SECTION("boundaries and monotonicity") {
    CHECK(regularized_incomplete_beta(3.0, 4.0, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(3.0, 4.0, 1.0) == 1.0);
    double prev = 0.0;
    for (double x = 0.05; x < 1.0; x += 0.05) {
      double cur = regularized_incomplete_beta(3.0, 4.0, x);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("incomplete beta agrees with direct quadrature") {
  for (double a : {1.0, 1.5, 2.5, 7.0, 32.0}) {
    for (double b : {1.0, 2.0, 6.5, 20.0}) {
      for (double x : {0.05, 0.2, 0.5, 0.77, 0.95}) {
        INFO("a=" << a << " b=" << b << " x=" << x);
        CHECK_THAT(regularized_incomplete_beta(a, b, x),
                   WithinAbs(beta_by_quadrature(a, b, x), 1e-9));
      }
    }
  }
}

TEST_CASE("two proportion z test") {
  SECTION("frozen reference values") {
    ProportionResult r = two_proportion_z(48, 50, 30, 50);
    CHECK_THAT(r.z, WithinRel(4.3452409462674082, 1e-13));
    CHECK_THAT(r.p, WithinRel(1.3912286969820268e-05, 1e-12));
    CHECK_THAT(r.rate_a, WithinAbs(0.96, 1e-15));
    CHECK_THAT(r.rate_b, WithinAbs(0.60, 1e-15));

    ProportionResult small = two_proportion_z(5, 8, 3, 9);
    CHECK_THAT(small.z, WithinRel(1.2025724741384843, 1e-13));
    CHECK_THAT(small.p, WithinRel(0.22914180480841895, 1e-12));
  }
  SECTION("equal rates") {
    ProportionResult r = two_proportion_z(10, 20, 10, 20);
    CHECK(r.z == 0.0);
    CHECK(r.p == 1.0);
  }
  SECTION("degenerate pools") {
    CHECK(two_proportion_z(20, 20, 20, 20).p == 1.0);
    CHECK(two_proportion_z(0, 20, 0, 20).p == 1.0);
  }
  SECTION("normal tail constant") {
    CHECK_THAT(normal_two_sided_p(1.96), WithinRel(0.049995790296440868, 1e-13));
    CHECK(normal_two_sided_p(0.0) == 1.0);
  }
}

TEST_CASE("deviation margin") {
  CHECK_THAT(hoeffding_margin(1000, 1e-6), WithinRel(0.085172348031870706, 1e-13));
  CHECK(hoeffding_margin(4000, 1e-6) < hoeffding_margin(1000, 1e-6));
}

TEST_CASE("statistics reject malformed inputs") {
  CHECK_THROWS_AS(welch_t_test({1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(welch_t_test({1.0, 2.0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(welch_t_test({3.0, 3.0}, {3.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, -2.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(student_t_two_sided_p(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(two_proportion_z(1, 0, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(two_proportion_z(3, 2, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(two_proportion_z(-1, 5, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(hoeffding_margin(0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(hoeffding_margin(10, 0.0), std::invalid_argument);
}

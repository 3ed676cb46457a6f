#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mapnav {

namespace detail {

// Continued fraction for the regularized incomplete beta, evaluated with the
// modified Lentz scheme. Converges quickly for x below (a+1)/(a+b+2); the
// caller flips to the mirrored tail otherwise.
inline double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 3e-16;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

// I_x(a, b), the regularized incomplete beta function.
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("incomplete beta needs positive shape parameters");
  }
  if (std::isnan(x)) throw std::invalid_argument("incomplete beta of NaN");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_cf(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Two-sided tail probability of Student's t with `dof` degrees of freedom.
inline double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

// Welch's unequal-variance t test, two sided.
inline WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("each sample needs at least two observations");
  }
  auto moments = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    return std::pair{mean, var};
  };
  auto [ma, va] = moments(a);
  auto [mb, vb] = moments(b);
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double sa = va / na, sb = vb / nb;
  if (sa + sb == 0.0) {
    throw std::invalid_argument("both samples are constant; the test is undefined");
  }
  WelchResult r;
  r.mean_a = ma;
  r.mean_b = mb;
  r.t = (ma - mb) / std::sqrt(sa + sb);
  r.dof = (sa + sb) * (sa + sb) /
          (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p = student_t_two_sided_p(r.t, r.dof);
  return r;
}

inline double normal_two_sided_p(double z) {
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

struct ProportionResult {
  double z = 0.0;
  double p = 1.0;
  double rate_a = 0.0;
  double rate_b = 0.0;
};

// Pooled two-proportion z test, two sided. When the pooled rate is degenerate
// (all successes or all failures) the groups are identical and p is 1.
inline ProportionResult two_proportion_z(int success_a, int n_a, int success_b, int n_b) {
  if (n_a <= 0 || n_b <= 0) throw std::invalid_argument("empty sample in proportion test");
  if (success_a < 0 || success_a > n_a || success_b < 0 || success_b > n_b) {
    throw std::invalid_argument("success count outside its sample size");
  }
  ProportionResult r;
  r.rate_a = static_cast<double>(success_a) / n_a;
  r.rate_b = static_cast<double>(success_b) / n_b;
  double pool = static_cast<double>(success_a + success_b) / (n_a + n_b);
  double se2 = pool * (1.0 - pool) * (1.0 / n_a + 1.0 / n_b);
  if (se2 == 0.0) {
    r.z = 0.0;
    r.p = 1.0;
    return r;
  }
  r.z = (r.rate_a - r.rate_b) / std::sqrt(se2);
  r.p = normal_two_sided_p(r.z);
  return r;
}

// Two-sided Hoeffding deviation bound: with probability at least 1 - delta a
// mean of n draws stays within the returned margin of its expectation.
inline double hoeffding_margin(int n, double delta) {
  if (n <= 0 || !(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("bad Hoeffding parameters");
  }
  return std::sqrt(std::log(2.0 / delta) / (2.0 * n));
}

}  // namespace mapnav

#ifndef TRISTEP_WELCH_HPP
#define TRISTEP_WELCH_HPP

#include <cmath>
#include <cstddef>
#include <span>

#include "tristep/errors.hpp"

namespace tristep {

struct WelchResult {
  double t_statistic = 0;
  double degrees_of_freedom = 0;
  double p_value = 1;
  bool degenerate = false;  // both variances zero
};

namespace detail {

// Regularized incomplete beta I_x(a, b) by the modified Lentz continued
// fraction (numerically the usual route to the Student-t survival function).
inline double ibeta_cf(double a, double b, double x) {
  const double kFpMin = 1e-300;
  const double kEps = 1e-15;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

inline double ibeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                 b * std::log1p(-x);
  double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0))
    return bt * ibeta_cf(a, b, x) / a;
  return 1.0 - bt * ibeta_cf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-tailed Student-t p-value: P(|T_df| >= |t|).
inline double student_t_two_tailed_p(double t, double df) {
  if (df <= 0) throw ConfigError("t distribution needs df > 0");
  if (!std::isfinite(t)) return 0.0;
  return detail::ibeta(df / 2.0, 0.5, df / (df + t * t));
}

inline double sample_mean(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sample_variance(std::span<const double> x, double mean) {
  double s = 0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

// Welch's two-sample t-test with the Welch-Satterthwaite degrees of freedom.
// Zero-variance conventions: equal constant samples give p = 1, different
// constants give p = 0 (flagged degenerate) so noise-free runs remain judgeable.
inline WelchResult welch_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) throw ConfigError("welch_t_test needs at least 2 samples per side");
  WelchResult res;
  double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  double mx = sample_mean(x), my = sample_mean(y);
  double vx = sample_variance(x, mx), vy = sample_variance(y, my);

  if (vx == 0.0 && vy == 0.0) {
    res.degenerate = true;
    res.degrees_of_freedom = nx + ny - 2;
    if (mx == my) {
      res.t_statistic = 0;
      res.p_value = 1;
    } else {
      res.t_statistic = mx > my ? HUGE_VAL : -HUGE_VAL;
      res.p_value = 0;
    }
    return res;
  }

  double se2 = vx / nx + vy / ny;
  res.t_statistic = (mx - my) / std::sqrt(se2);
  res.degrees_of_freedom =
      se2 * se2 / (vx * vx / (nx * nx * (nx - 1)) + vy * vy / (ny * ny * (ny - 1)));
  res.p_value = student_t_two_tailed_p(res.t_statistic, res.degrees_of_freedom);
  return res;
}

}  // namespace tristep

#endif

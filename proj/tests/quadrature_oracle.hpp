#ifndef TRISTEP_TESTS_QUADRATURE_ORACLE_HPP
#define TRISTEP_TESTS_QUADRATURE_ORACLE_HPP

// Test-only numerical oracle for the two-tailed Student-t p-value: adaptive
// Simpson quadrature of the t density. Written against the density formula
// directly; shares nothing with the incomplete-beta route it checks.

#include <cmath>
#include <span>

#include "tristep/welch.hpp"

namespace tristep_test {

inline double t_pdf(double x, double df) {
  double ln = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) -
              0.5 * std::log(df * 3.14159265358979323846) -
              (df + 1) / 2 * std::log1p(x * x / df);
  return std::exp(ln);
}

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4 * fm + fb);
}

inline double adaptive(double a, double b, double fa, double fm, double fb, double whole,
                       double eps, int depth, double df) {
  double m = (a + b) / 2;
  double lm = (a + m) / 2, rm = (m + b) / 2;
  double flm = t_pdf(lm, df), frm = t_pdf(rm, df);
  double left = simpson(a, m, fa, flm, fm), right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15 * eps)
    return left + right + (left + right - whole) / 15.0;
  return adaptive(a, m, fa, flm, fm, left, eps / 2, depth - 1, df) +
         adaptive(m, b, fm, frm, fb, right, eps / 2, depth - 1, df);
}

inline double oracle_two_tailed_p(double t, double df) {
  double T = std::fabs(t);
  double cut = T + 40 * std::sqrt(df / 2 + 4) + 40;
  double fa = t_pdf(T, df), fb = t_pdf(cut, df);
  double m = (T + cut) / 2, fm = t_pdf(m, df);
  double whole = simpson(T, cut, fa, fm, fb);
  double tail = adaptive(T, cut, fa, fm, fb, whole, 1e-12, 60, df);
  return 2.0 * tail;
}

inline double oracle_welch_p(std::span<const double> x, std::span<const double> y) {
  using tristep::sample_mean;
  using tristep::sample_variance;
  double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  double mx = sample_mean(x), my = sample_mean(y);
  double vx = sample_variance(x, mx), vy = sample_variance(y, my);
  double se2 = vx / nx + vy / ny;
  double t = (mx - my) / std::sqrt(se2);
  double df = se2 * se2 / (vx * vx / (nx * nx * (nx - 1)) + vy * vy / (ny * ny * (ny - 1)));
  return oracle_two_tailed_p(t, df);
}

}  // namespace tristep_test

#endif

#pragma once

// Test-only oracles, independent of the library's numerical paths.

#include <cmath>
#include <functional>

namespace oracles {

// erf by its Maclaurin series; converges fast for |x| <= 3 and suffices for
// CDF targets away from the far tails.
inline double erf_series(double x) {
  const double pi = 3.14159265358979323846;
  double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    sum += term / (2.0 * n + 1.0);
    if (std::abs(term) < 1e-18) break;
  }
  return 2.0 / std::sqrt(pi) * sum;
}

// Standard normal CDF from the series for moderate x; clamps in the far
// tails where the target values are 0/1 to 1e-12 anyway.
inline double normal_cdf_series(double x) {
  if (x > 7.0) return 1.0;
  if (x < -7.0) return 0.0;
  return 0.5 * (1.0 + erf_series(x / std::sqrt(2.0)));
}

// pi from Machin's formula with the arctangent series.
inline double pi_machin() {
  auto atan_series = [](double x) {
    double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
      term *= -x * x;
      sum += term / (2.0 * n + 1.0);
      if (std::abs(term) < 1e-18) break;
    }
    return sum;
  };
  return 16.0 * atan_series(1.0 / 5.0) - 4.0 * atan_series(1.0 / 239.0);
}

// Square root by Newton iteration from a crude seed.
inline double sqrt_newton(double v) {
  double x = v > 1.0 ? v : 1.0;
  for (int i = 0; i < 200; ++i) x = 0.5 * (x + v / x);
  return x;
}

// Golden ratio conjugate (sqrt(5)-1)/2 via the quadratic formula.
inline double quadratic_formula_root() { return (sqrt_newton(5.0) - 1.0) / 2.0; }

// Centered finite difference.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracles

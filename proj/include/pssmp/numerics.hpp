#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "errors.hpp"

namespace pssmp::num {

inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr double pi = 3.14159265358979323846;

inline double log_add_exp(double a, double b) {
  if (a == -inf) return b;
  if (b == -inf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// log(e^a - e^b) for a >= b.
inline double log_sub_exp(double a, double b) {
  if (b == -inf) return a;
  if (b > a) throw NumericError("log_sub_exp: b > a");
  if (a == b) return -inf;
  double d = b - a;
  return a + (d > -0.693 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d)));
}

/// log(expm1(z)) for z > 0.
inline double log_expm1(double z) {
  if (z > 30.0) return z + std::log1p(-std::exp(-z));
  return std::log(std::expm1(z));
}

/// log( (e^{z} - 1) / z ), continuous at z = 0 and stable for z of either sign.
inline double log_expm1_ratio(double z) {
  if (std::abs(z) < 1e-8) return 0.5 * z;
  if (z > 0) return log_expm1(z) - std::log(z);
  // (1 - e^{z}) / (-z)
  return std::log(-std::expm1(z)) - std::log(-z);
}

/// Log of the integral over [0, len] of exp(c*(a + b*u)) du.
inline double log_segment_integral(double a, double b, double len, double c) {
  if (len <= 0) return -inf;
  return c * a + std::log(len) + log_expm1_ratio(c * b * len);
}

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately keeps precision when x is close to 1.
inline double ibeta(double a, double b, double x, double y) {
  if (!(a > 0) || !(b > 0)) throw DomainError("ibeta: parameters must be positive");
  if (x <= 0) return 0.0;
  if (y <= 0) return 1.0;
  bool swap = x > (a + 1.0) / (a + b + 2.0);
  if (swap) {
    std::swap(a, b);
    std::swap(x, y);
  }
  double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  double front = std::exp(a * std::log(x) + b * std::log(y) - lbeta) / a;

  // modified Lentz on the standard continued fraction
  const double tiny = 1e-300;
  const double eps = 1e-15;
  double f = 1.0, c = 1.0, d = 0.0;
  bool converged = false;
  for (int i = 0; i <= 20000; ++i) {
    int m = i / 2;
    double num;
    if (i == 0)
      num = 1.0;
    else if (i % 2 == 0)
      num = (m * (b - m) * x) / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
    else
      num = -((a + m) * (a + b + m) * x) / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    double cd = c * d;
    f *= cd;
    if (std::abs(1.0 - cd) < eps) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericError("ibeta: continued fraction did not converge");
  double r = front * (f - 1.0);
  return swap ? 1.0 - r : r;
}

inline double ibeta(double a, double b, double x) { return ibeta(a, b, x, 1.0 - x); }

/// Root of an increasing function on [lo, hi] by bisection in log scale.
/// Returns the smallest point (to relative tolerance) where f exceeds target.
inline double bisect_increasing_log(const std::function<double(double)>& f, double target,
                                    double lo, double hi, double rel_tol = 1e-12) {
  if (!(lo > 0) || !(hi > lo)) throw UsageError("bisect_increasing_log: bad bracket");
  for (int it = 0; it < 4000; ++it) {
    if (hi / lo - 1.0 <= rel_tol) return hi;
    double mid = std::sqrt(lo) * std::sqrt(hi);
    if (!(mid > lo) || !(mid < hi)) return hi;
    if (f(mid) > target)
      hi = mid;
    else
      lo = mid;
  }
  throw NumericError("bisect_increasing_log: no convergence");
}

/// Limiting survival function of sqrt(n) * D_n.
inline double kolmogorov_sf(double x) {
  if (x <= 0) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0;
  for (int k = 1; k <= 200; ++k) {
    double term = 2.0 * std::exp(-2.0 * k * k * x * x) * ((k % 2) ? 1.0 : -1.0);
    s += term;
    if (std::abs(term) < 1e-17) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

/// c with kolmogorov_sf(c) = level; the KS critical value is c / sqrt(n).
inline double kolmogorov_quantile(double level) {
  double lo = 0.2, hi = 5.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (kolmogorov_sf(mid) > level)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace pssmp::num

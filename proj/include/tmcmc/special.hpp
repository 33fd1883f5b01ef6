#pragma once

#include <cmath>
#include <limits>
#include <numbers>

// Normal distribution helpers evaluated in log space.

namespace tmcmc::special {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

inline double normal_log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// log Phi(z), accurate in the far lower tail.
inline double log_normal_cdf(double z) {
  if (z > 0.0) {
    return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  }
  if (z > -35.0) {
    return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  }
  // Mills-ratio asymptotic series; relative error below 1e-12 for z < -35.
  const double r = 1.0 / (z * z);
  const double series =
      1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return normal_log_pdf(z) - std::log(-z) + std::log(series);
}

/// log(1 - Phi(z)).
inline double log_normal_sf(double z) { return log_normal_cdf(-z); }

/// log(2 Phi(a) - 1) for a >= 0; -inf at a == 0.
inline double log_two_phi_minus_one(double a) {
  if (a <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(std::erf(a / std::numbers::sqrt2));
}

/// log(exp(a) + exp(b)).
inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = a > b ? a : b;
  return hi + std::log1p(std::exp(-std::fabs(a - b)));
}

}  // namespace tmcmc::special

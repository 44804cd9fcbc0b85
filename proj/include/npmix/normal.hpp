#pragma once

#include <cmath>
#include <limits>

namespace npmix {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2*pi)
inline constexpr double kInvSqrt2 = 0.70710678118654752440;    // 1/sqrt(2)
// Contributions below this are flushed to zero so that -inf propagation in
// log-likelihoods is deterministic.
inline constexpr double kDensityFloor = 1e-300;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// Standard normal density.
inline double norm_pdf(double z) {
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

inline double log_norm_pdf(double z) {
  return -0.91893853320467274178 - 0.5 * z * z;  // -log(sqrt(2*pi)) - z^2/2
}

// Standard normal cdf via erfc; accurate in both tails.
inline double norm_cdf(double z) {
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

inline double flush_tiny(double x) {
  return x < kDensityFloor ? 0.0 : x;
}

}  // namespace npmix

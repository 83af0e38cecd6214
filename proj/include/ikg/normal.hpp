#pragma once

#include <cmath>
#include <numbers>

namespace ikg::normal {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline double pdf(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

inline double cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

// Phi(-u) / phi(u). The complementary error function is used for small u and
// the Laplace continued fraction, evaluated bottom up, for u >= 5.
inline double mills_ratio(double u) {
  if (u < 5.0) {
    return 0.5 * std::erfc(u / std::numbers::sqrt2) * std::exp(0.5 * u * u) / kInvSqrt2Pi;
  }
  double t = u;
  for (int k = 80; k >= 1; --k) t = u + k / t;
  return 1.0 / t;
}

// Large-u approximation of the Mills ratio.
inline double mills_ratio_asymptotic(double u) { return u / (u * u + 1.0); }

}  // namespace ikg::normal

#pragma once

// Standard-normal helpers with tail-stable logarithms.
//
// The optimizers in this library deliberately probe regions where the
// latent index a = x'beta / exp(z'gamma) is far out in the normal tail,
// so a naive log(Phi(a)) that underflows near a ~ -38 would poison the
// objective with -inf. log_norm_cdf below stays finite down to
// |a| ~ 1e154 (where a*a itself overflows).

#include <cmath>
#include <limits>
#include <numbers>

namespace hetprobit {

inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;  // ln sqrt(2*pi)
inline constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;  // 1/sqrt(2*pi)

inline double norm_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

inline double log_norm_pdf(double x) {
  return -0.5 * x * x - kLogSqrt2Pi;
}

inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x / kSqrt2);
}

// ln Phi(x).
//
//   x >= -1 : log1p(-Phi(-x)); Phi(-x) <= 0.84, no cancellation.
//   x < -1  : ln(erfc(-x/sqrt2)) - ln 2; erfc stays normal down to x ~ -37.5.
//   x < -37 : asymptotic expansion ln Phi(x) = -x^2/2 - ln(-x) - ln sqrt(2 pi)
//             + log1p(-1/x^2 + 3/x^4 - 15/x^6 + 105/x^8), good to ~1e-13
//             relative already at the switch point.
//
// Returns -inf only once -x^2/2 overflows (|x| > ~1.3e154).
inline double log_norm_cdf(double x) {
  if (x >= -1.0) {
    return std::log1p(-0.5 * std::erfc(x / kSqrt2));
  }
  if (x >= -37.0) {
    return std::log(std::erfc(-x / kSqrt2)) - kLn2;
  }
  const double ix2 = 1.0 / (x * x);
  const double series = ix2 * (-1.0 + ix2 * (3.0 + ix2 * (-15.0 + ix2 * 105.0)));
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log1p(series);
}

// Hazard rate phi(t) / (1 - Phi(t)), stable over the whole double range.
// For t -> +inf this behaves like t + 1/t; for t -> -inf it decays to 0.
inline double norm_hazard(double t) {
  if (t > 1.0e8) {
    return t + 1.0 / t;  // remaining terms are O(t^-3), below double precision
  }
  return std::exp(log_norm_pdf(t) - log_norm_cdf(-t));
}

}  // namespace hetprobit

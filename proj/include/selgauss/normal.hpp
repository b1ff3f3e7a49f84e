#pragma once

#include <cmath>

namespace selgauss {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline double norm_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }
inline double norm_logpdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

// Lower tail P(Z <= z). Routed through erfc so the far lower tail keeps full
// relative accuracy instead of cancelling to 0.
inline double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

// Upper tail P(Z > z).
inline double norm_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

// Inverse of norm_cdf. Rational approximations with a dedicated tail branch;
// usable down to denormal p without losing the tail.
double norm_quantile(double p);

// P(a <= Z <= b) for standard normal Z; +-inf endpoints allowed. Differences
// are taken on the same tail so nothing cancels.
double norm_interval_prob(double a, double b);

}  // namespace selgauss

#pragma once

namespace mtkit::normal {

/// Standard normal CDF, P(Z <= x).
double cdf(double x) noexcept;

/// Upper tail P(Z > x), accurate deep into the tail.
double sf(double x) noexcept;

double pdf(double x) noexcept;

/// Inverse CDF for p in (0,1); returns -inf / +inf at 0 / 1 and NaN outside.
/// Wichura's AS241 (PPND16), relative error around 1e-16.
double quantile(double p) noexcept;

}  // namespace mtkit::normal

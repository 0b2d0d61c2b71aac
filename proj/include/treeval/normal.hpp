#pragma once

namespace treeval {

/// Standard normal CDF, Phi(x) = erfc(-x/sqrt(2))/2. glibc's erfc is
/// accurate to a few ulp, which keeps the absolute error below 1e-15.
/// Accepts +-infinity.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x), computed without cancellation.
double normal_sf(double x);

double normal_pdf(double x);

/// Inverse of normal_cdf on (0,1): Acklam's rational approximation refined
/// by one Halley step, giving relative error near machine precision.
/// Returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

}  // namespace treeval

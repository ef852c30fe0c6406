#include "cobase/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace cobase {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2*pi)
constexpr double kSqrt2 = 1.4142135623730950488;

// Acklam's rational approximation to the standard normal quantile,
// relative error ~1.15e-9 before refinement. Valid for p in (0, 0.5].
double ppf_estimate(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}
}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_ppf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("norm_ppf: p must lie strictly inside (0,1)");
  // Work in the lower half; 1-p is exact for p >= 0.5.
  if (p > 0.5) return -norm_ppf(1.0 - p);
  double x = ppf_estimate(p);
  // Two Newton steps. With x <= 0 the CDF comes straight from erfc, so the
  // residual p - cdf(x) is computed without cancellation.
  for (int i = 0; i < 2; ++i) {
    const double err = norm_cdf(x) - p;
    const double dens = norm_pdf(x);
    if (dens <= 0.0) break;
    x -= err / dens;
  }
  return x;
}

}  // namespace cobase

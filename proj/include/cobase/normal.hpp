#pragma once

namespace cobase {

// Standard normal density, CDF and quantile function. norm_ppf uses a
// rational approximation refined by Newton steps against the erfc-based
// CDF; absolute CDF-error below 1e-10 over p in [1e-300, 1-1e-16].
double norm_pdf(double x);
double norm_cdf(double x);
double norm_ppf(double p);

}  // namespace cobase

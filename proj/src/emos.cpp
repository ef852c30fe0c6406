#include "cobase/emos.hpp"

#include <cmath>

#include "cobase/normal.hpp"
#include "nelder_mead.hpp"

namespace cobase {

namespace {
constexpr double kInvSqrtPi = 0.5641895835477562869;  // 1/sqrt(pi)
constexpr int kMinWindowPairs = 10;
constexpr double kFitTol = 1e-12;
constexpr int kFitMaxIter = 2000;

EmosCoefficients from_unconstrained(const std::vector<double>& x) {
  EmosCoefficients c;
  c.alpha0 = x[0];
  c.alpha1 = x[1];
  c.beta0 = x[2] * x[2];
  c.beta1 = x[3] * x[3];
  return c;
}
}  // namespace

double GaussianMargin::quantile(double p) const { return mu + sigma * norm_ppf(p); }

double gaussian_crps(const GaussianMargin& margin, double y) {
  const double z = (y - margin.mu) / margin.sigma;
  return margin.sigma *
         (z * (2.0 * norm_cdf(z) - 1.0) + 2.0 * norm_pdf(z) - kInvSqrtPi);
}

GaussianMargin predict_margin(const EmosCoefficients& coeffs, double ens_mean,
                              double ens_var) {
  GaussianMargin m;
  m.mu = coeffs.alpha0 + coeffs.alpha1 * ens_mean;
  m.sigma = std::sqrt(
      std::max(coeffs.beta0 + coeffs.beta1 * ens_var, kSigmaMin * kSigmaMin));
  return m;
}

double emos_objective(const EmosCoefficients& coeffs,
                      const std::vector<EmosTrainingPair>& window) {
  double total = 0.0;
  for (const auto& p : window)
    total += gaussian_crps(predict_margin(coeffs, p.ens_mean, p.ens_var), p.obs);
  return total / static_cast<double>(window.size());
}

EmosCoefficients fit_emos(const std::vector<EmosTrainingPair>& window) {
  const std::size_t n = window.size();
  if (n < kMinWindowPairs)
    throw InsufficientDataError("fit_emos: need at least 10 training pairs, got " +
                                std::to_string(n));

  // Start from the least-squares line of y on m; b0 from the residual
  // spread, b1 small.
  double mx = 0.0, my = 0.0;
  for (const auto& p : window) {
    mx += p.ens_mean;
    my += p.obs;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : window) {
    sxx += (p.ens_mean - mx) * (p.ens_mean - mx);
    sxy += (p.ens_mean - mx) * (p.obs - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (const auto& p : window) {
    const double r = p.obs - (intercept + slope * p.ens_mean);
    ss_res += r * r;
  }
  const double resid_sd = std::sqrt(ss_res / static_cast<double>(n));

  auto objective = [&](const std::vector<double>& x) {
    return emos_objective(from_unconstrained(x), window);
  };

  std::vector<double> x0 = {intercept, slope, std::max(resid_sd, kSigmaMin), 0.1};
  auto result = detail::nelder_mead(objective, x0, kFitTol, kFitMaxIter, 0.05);
  // Restart from the found point with a small fresh simplex; the first pass
  // can stall on collapsed geometry short of the optimum.
  auto restarted =
      detail::nelder_mead(objective, result.x, kFitTol, kFitMaxIter, 0.002);
  if (restarted.value <= result.value) result = restarted;

  EmosCoefficients coeffs = from_unconstrained(result.x);
  coeffs.converged = result.converged;
  return coeffs;
}

}  // namespace cobase

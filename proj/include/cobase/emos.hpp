#pragma once

#include <vector>

#include "cobase/types.hpp"

namespace cobase {

// Gaussian predictive distribution for one margin.
struct GaussianMargin {
  double mu = 0.0;
  double sigma = 1.0;

  double quantile(double p) const;  // mu + sigma * norm_ppf(p)
};

// Regression y ~ N(alpha0 + alpha1*m, beta0 + beta1*s2) with the variance
// coefficients kept nonnegative through a quadratic link.
struct EmosCoefficients {
  double alpha0 = 0.0;
  double alpha1 = 1.0;
  double beta0 = 1.0;
  double beta1 = 0.0;
  bool converged = true;  // false when the optimizer hit its iteration cap
};

struct EmosTrainingPair {
  double ens_mean = 0.0;
  double ens_var = 0.0;  // s^2
  double obs = 0.0;      // y
};

// Predictive standard deviations are floored at this value everywhere.
inline constexpr double kSigmaMin = 0.05;

// Closed-form CRPS of a Gaussian predictive distribution:
//   sigma * ( z*(2*Phi(z)-1) + 2*phi(z) - 1/sqrt(pi) ),  z = (y-mu)/sigma.
double gaussian_crps(const GaussianMargin& margin, double y);

// Minimizes the mean Gaussian CRPS over the window by Nelder-Mead in the
// unconstrained (alpha0, alpha1, b0, b1) coordinates with beta = b^2.
// Requires at least 10 pairs; throws InsufficientDataError otherwise.
EmosCoefficients fit_emos(const std::vector<EmosTrainingPair>& window);

GaussianMargin predict_margin(const EmosCoefficients& coeffs, double ens_mean,
                              double ens_var);

// Mean Gaussian CRPS of `coeffs` over the window; the fit objective.
double emos_objective(const EmosCoefficients& coeffs,
                      const std::vector<EmosTrainingPair>& window);

}  // namespace cobase

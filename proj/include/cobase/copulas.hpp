#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cobase/emos.hpp"
#include "cobase/rng.hpp"
#include "cobase/types.hpp"

namespace cobase {

enum class CopulaFamily { Gaussian, Clayton, Frank, Gumbel };

std::string copula_family_name(CopulaFamily f);
CopulaFamily parse_copula_family(const std::string& name);

// Fitted dependence model: a correlation matrix for the Gaussian family,
// a scalar theta for the exchangeable Archimedean families.
struct CopulaModel {
  CopulaFamily family = CopulaFamily::Gaussian;
  std::size_t dim = 0;
  Matrix sigma;        // Gaussian only, dim x dim correlation matrix
  double theta = 0.0;  // Archimedean only
  bool clamped = false;  // fit hit a feasibility bound

  static CopulaModel gaussian(Matrix sigma);
  static CopulaModel archimedean(CopulaFamily family, double theta, std::size_t dim);

  void validate() const;
};

// Latent-normal scores of a training window: per column, value ranks mapped
// through Phi^{-1}(rank/(n+1)). Ties are broken by seeded jitter and the
// affected columns reported.
struct NormalScores {
  Matrix scores;                             // n x d
  std::vector<std::size_t> jittered_columns;
};

NormalScores pit_to_normal_scores(const Matrix& window_obs, std::uint64_t seed = 0);

// Correlation matrix of the normal scores, shrunk toward the identity by
// lambda = min(0.5, d/n) and repaired to a valid correlation matrix.
CopulaModel fit_gaussian_copula(const Matrix& window_obs);

// Theta from the average pairwise Kendall tau:
//   Clayton  theta = 2 tau / (1 - tau)
//   Gumbel   theta = 1 / (1 - tau)
//   Frank    tau = 1 - 4/theta (1 - D1(theta)), inverted by bisection.
// Infeasible tau values are clamped (model flagged).
CopulaModel fit_archimedean(const Matrix& window_obs, CopulaFamily family);

// N x d sample with uniform margins. Gaussian: Cholesky of sigma applied to
// i.i.d. normals, then Phi. Archimedean: Marshall-Olkin frailty
// construction; Frank with theta < 0 is only defined for d = 2 (conditional
// inversion). Entries clamped to [1e-12, 1-1e-12].
Matrix sample_copula(const CopulaModel& model, int n, std::uint64_t seed);

// Classical Gaussian copula forecast: margin quantile functions applied to
// the columns of sample_copula. Returns N x d.
Matrix gca_transform(const CopulaModel& model,
                     const std::vector<GaussianMargin>& margins, int n,
                     std::uint64_t seed);

// --- building blocks, exposed for reuse and direct testing ---------------

// Kendall's tau-b via Knight's O(n log n) merge-count.
double kendall_tau(std::span<const double> x, std::span<const double> y);

// Average of kendall_tau over all column pairs.
double mean_pairwise_tau(const Matrix& data);

// Order-1 Debye function D1(x) = (1/x) * integral_0^x t/(e^t - 1) dt.
double debye1(double x);

double clayton_theta_from_tau(double tau);
double gumbel_theta_from_tau(double tau);
double frank_theta_from_tau(double tau);
double frank_tau_from_theta(double theta);

// Symmetrize, floor the eigenvalues, and rescale to unit diagonal.
Matrix repair_correlation(Matrix sigma, double eig_floor = 1e-6);

// One draw from the positive stable law with Laplace transform
// exp(-t^alpha), 0 < alpha <= 1 (Kanter / Chambers-Mallows-Stuck).
double positive_stable(Rng& rng, double alpha);

// One draw from the logarithmic series distribution with parameter p
// (Kemp's second accelerated generator).
std::uint64_t log_series(Rng& rng, double p);

}  // namespace cobase

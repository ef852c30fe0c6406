#include <cmath>
#include <doctest.h>
#include <random>

#include "cobase/emos.hpp"
#include "oracles.hpp"

using namespace cobase;

namespace {
// Training window with a known linear truth: y = 2 + m + eps,
// eps ~ N(0, 0.5^2), constant ensemble variance.
std::vector<EmosTrainingPair> linear_window(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> m_dist(10.0, 4.0);
  std::normal_distribution<double> eps(0.0, 0.5);
  std::vector<EmosTrainingPair> window(n);
  for (auto& p : window) {
    p.ens_mean = m_dist(gen);
    p.ens_var = 1.0;
    p.obs = 2.0 + p.ens_mean + eps(gen);
  }
  return window;
}

double fd_gradient_inf_norm(const EmosCoefficients& c,
                            const std::vector<EmosTrainingPair>& window) {
  // central differences in the unconstrained (a0, a1, b0, b1) coordinates
  std::vector<double> x = {c.alpha0, c.alpha1, std::sqrt(c.beta0), std::sqrt(c.beta1)};
  const auto eval = [&](const std::vector<double>& p) {
    EmosCoefficients t;
    t.alpha0 = p[0];
    t.alpha1 = p[1];
    t.beta0 = p[2] * p[2];
    t.beta1 = p[3] * p[3];
    return emos_objective(t, window);
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
    std::vector<double> hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    worst = std::max(worst, std::abs((eval(hi) - eval(lo)) / (2.0 * h)));
  }
  return worst;
}
}  // namespace

TEST_CASE("gaussian_crps against quadrature") {
  const double q = oracle::gaussian_crps_quadrature(0.0, 1.0, 0.0);
  CHECK(q == doctest::Approx(0.23370).epsilon(5e-4));
  CHECK(gaussian_crps({0.0, 1.0}, 0.0) == doctest::Approx(q).epsilon(1e-6));
  CHECK(gaussian_crps({0.0, 1.0}, 0.0) == doctest::Approx(0.23370055).epsilon(1e-4));

  // a far-out observation: crps tends to |y| - E|X-X'|/2 = 10 - 0.5642
  CHECK(gaussian_crps({0.0, 1.0}, 10.0) == doctest::Approx(9.4358).epsilon(1e-3 / 9.4));
  CHECK(gaussian_crps({0.0, 1.0}, 10.0) ==
        doctest::Approx(oracle::gaussian_crps_quadrature(0.0, 1.0, 10.0)).epsilon(1e-5));
}

TEST_CASE("gaussian_crps scale and symmetry at y = mu") {
  const double at_center = 2.0 * 0.3989422804014327 - 0.5641895835477563;
  for (const double sigma : {0.25, 1.0, 3.0}) {
    CHECK(gaussian_crps({5.0, sigma}, 5.0) ==
          doctest::Approx(sigma * at_center).epsilon(1e-12));
  }
}

TEST_CASE("gaussian_crps is nonnegative") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> dist;
  for (int rep = 0; rep < 1000; ++rep) {
    const GaussianMargin m{dist(gen), 0.05 + std::abs(dist(gen))};
    CHECK(gaussian_crps(m, dist(gen) * 3.0) >= 0.0);
  }
}

TEST_CASE("predict_margin substitutions") {
  const GaussianMargin a = predict_margin({0.0, 1.0, 0.0, 1.0}, 5.0, 4.0);
  CHECK(a.mu == 5.0);
  CHECK(a.sigma == 2.0);

  const GaussianMargin b = predict_margin({1.0, 2.0, 0.25, 0.0}, 3.0, 100.0);
  CHECK(b.mu == 7.0);
  CHECK(b.sigma == 0.5);

  // variance floor
  const GaussianMargin c = predict_margin({0.0, 1.0, 0.0, 0.0}, -3.0, 42.0);
  CHECK(c.sigma == kSigmaMin);
}

TEST_CASE("fit_emos recovers a linear relation") {
  const auto window = linear_window(200, 31);
  const EmosCoefficients c = fit_emos(window);

  CHECK(c.alpha0 > 1.8);
  CHECK(c.alpha0 < 2.2);
  CHECK(c.alpha1 > 0.95);
  CHECK(c.alpha1 < 1.05);
  CHECK(c.beta0 >= 0.0);
  CHECK(c.beta1 >= 0.0);

  // the OLS oracle on the same window brackets the CRPS fit tightly here
  std::vector<double> ms, ys;
  for (const auto& p : window) {
    ms.push_back(p.ens_mean);
    ys.push_back(p.obs);
  }
  const auto [b0, b1] = oracle::ols(ms, ys);
  CHECK(std::abs(c.alpha0 - b0) < 0.15);
  CHECK(std::abs(c.alpha1 - b1) < 0.02);

  CHECK(fd_gradient_inf_norm(c, window) <= 1e-4);
}

TEST_CASE("fit objective does not exceed its initialization") {
  const auto window = linear_window(60, 32);
  const EmosCoefficients fitted = fit_emos(window);

  std::vector<double> ms, ys;
  for (const auto& p : window) {
    ms.push_back(p.ens_mean);
    ys.push_back(p.obs);
  }
  const auto [b0, b1] = oracle::ols(ms, ys);
  double ss = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const double r = ys[i] - (b0 + b1 * ms[i]);
    ss += r * r;
  }
  EmosCoefficients init;
  init.alpha0 = b0;
  init.alpha1 = b1;
  init.beta0 = ss / static_cast<double>(ms.size());
  init.beta1 = 0.01;
  CHECK(emos_objective(fitted, window) <= emos_objective(init, window) + 1e-12);
}

TEST_CASE("perfect forecasts drive sigma to the floor") {
  std::mt19937_64 gen(33);
  std::normal_distribution<double> m_dist(0.0, 5.0);
  std::vector<EmosTrainingPair> window(50);
  for (auto& p : window) {
    p.ens_mean = m_dist(gen);
    p.ens_var = 1.0;
    p.obs = p.ens_mean;
  }
  const EmosCoefficients c = fit_emos(window);
  CHECK(std::abs(c.alpha0) < 0.05);
  CHECK(c.alpha1 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(predict_margin(c, 1.23, 1.0).sigma == doctest::Approx(kSigmaMin).epsilon(1e-6));
}

TEST_CASE("translation equivariance") {
  const auto window = linear_window(80, 34);
  const double shift = 11.5;
  auto shifted = window;
  for (auto& p : shifted) {
    p.ens_mean += shift;
    p.obs += shift;
  }
  const EmosCoefficients a = fit_emos(window);
  const EmosCoefficients b = fit_emos(shifted);
  for (const double m : {3.0, 9.0, 14.0}) {
    const GaussianMargin pa = predict_margin(a, m, 1.0);
    const GaussianMargin pb = predict_margin(b, m + shift, 1.0);
    CHECK(pb.mu == doctest::Approx(pa.mu + shift).epsilon(1e-6));
  }
}

TEST_CASE("short windows are rejected") {
  CHECK_THROWS_AS(fit_emos(linear_window(9, 35)), InsufficientDataError);
  CHECK_NOTHROW(fit_emos(linear_window(10, 36)));
}

TEST_CASE("gaussian margin quantile") {
  const GaussianMargin m{10.0, 2.0};
  CHECK(m.quantile(0.5) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(m.quantile(0.975) == doctest::Approx(10.0 + 2.0 * 1.959963985).epsilon(1e-8));
}

#include <cmath>
#include <doctest.h>

#include "cobase/normal.hpp"
#include "oracles.hpp"

using namespace cobase;

TEST_CASE("norm_ppf inverts the CDF to 1e-10 across the p range") {
  // grid spanning [1e-8, 1-1e-8] on a log scale plus the bulk
  std::vector<double> grid;
  for (double p = 1e-8; p < 0.02; p *= 3.7) grid.push_back(p);
  for (double p = 0.02; p <= 0.98; p += 0.02) grid.push_back(p);
  for (double q = 1e-8; q < 0.02; q *= 3.7) grid.push_back(1.0 - q);
  for (const double p : grid) {
    const double x = norm_ppf(p);
    CHECK(std::abs(norm_cdf(x) - p) <= 1e-10);
  }
}

TEST_CASE("norm_ppf matches the bisection oracle") {
  for (const double p : {1e-7, 1e-4, 0.01, 0.25, 0.5, 0.6, 0.975, 0.9999}) {
    CHECK(norm_ppf(p) == doctest::Approx(oracle::phi_inverse(p)).epsilon(1e-9));
  }
  CHECK(norm_ppf(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(norm_ppf(0.25) == doctest::Approx(-0.6744897501).epsilon(1e-8));
  CHECK(norm_ppf(0.75) == doctest::Approx(0.6744897501).epsilon(1e-8));
}

TEST_CASE("norm_ppf symmetry and domain") {
  for (const double p : {0.001, 0.2, 0.37}) {
    CHECK(norm_ppf(p) == doctest::Approx(-norm_ppf(1.0 - p)).epsilon(1e-12));
  }
  CHECK_THROWS(norm_ppf(0.0));
  CHECK_THROWS(norm_ppf(1.0));
  CHECK_THROWS(norm_ppf(-0.1));
}

TEST_CASE("norm_cdf and norm_pdf basics") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norm_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(norm_cdf(-8.0) + norm_cdf(8.0) == doctest::Approx(1.0).epsilon(1e-14));
}

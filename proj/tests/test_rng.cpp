#include <cmath>
#include <doctest.h>
#include <set>

#include "cobase/rng.hpp"
#include "oracles.hpp"

using namespace cobase;

TEST_CASE("identical seeds give identical streams") {
  Rng a(987654321), b(987654321);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform01() == b.uniform01());
    CHECK(a.normal() == b.normal());
    CHECK(a.gamma(2.5) == b.gamma(2.5));
  }
}

TEST_CASE("uniform01 stays strictly inside (0,1)") {
  Rng rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("gamma sampler moments") {
  Rng rng(20240501);
  for (const double shape : {0.4, 1.0, 2.5, 9.0}) {
    const int n = 200000;
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape);
      mean += g;
      m2 += g * g;
    }
    mean /= n;
    const double var = m2 / n - mean * mean;
    // mean = shape, var = shape; 6-sigma MC bands
    const double mean_tol = 6.0 * std::sqrt(shape / n);
    CHECK(std::abs(mean - shape) < mean_tol);
    CHECK(std::abs(var - shape) < 0.05 * shape + mean_tol);
  }
}

TEST_CASE("uniform_int is unbiased over small ranges") {
  Rng rng(99);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[rng.uniform_int(7)];
  for (const int c : counts) CHECK(std::abs(c - n / 7) < 600);  // ~6 sigma
}

TEST_CASE("sample_without_replacement returns distinct indices") {
  Rng rng(5);
  const auto pick = rng.sample_without_replacement(50, 20);
  CHECK(pick.size() == 20);
  CHECK(std::set<std::size_t>(pick.begin(), pick.end()).size() == 20);
  for (const std::size_t v : pick) CHECK(v < 50);

  const auto whole = rng.permutation(8);
  CHECK(std::set<std::size_t>(whole.begin(), whole.end()).size() == 8);
  CHECK_THROWS(rng.sample_without_replacement(3, 4));
}

TEST_CASE("mix_seed separates salts") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t base : {0ull, 1ull, 42ull}) {
    for (std::uint64_t salt = 0; salt < 200; ++salt) seen.insert(mix_seed(base, salt));
  }
  CHECK(seen.size() == 600);
}

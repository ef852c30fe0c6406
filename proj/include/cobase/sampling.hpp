#pragma once

#include <cstdint>
#include <vector>

#include "cobase/emos.hpp"

namespace cobase {

enum class SampleStrategy { Quantile, Random, Stratified };

struct MarginSample {
  std::vector<double> values;
  SampleStrategy strategy = SampleStrategy::Quantile;

  std::size_t size() const { return values.size(); }
};

// Equidistant quantiles F^{-1}(i/(N+1)), i = 1..N; strictly increasing.
MarginSample uniform_quantiles(const GaussianMargin& margin, int n);

// N i.i.d. draws from the margin, deterministic given the seed.
MarginSample random_sample(const GaussianMargin& margin, int n, std::uint64_t seed);

// Dispatch on strategy. Stratified is reserved and rejected for now.
MarginSample sample_margin(const GaussianMargin& margin, int n,
                           SampleStrategy strategy, std::uint64_t seed);

}  // namespace cobase

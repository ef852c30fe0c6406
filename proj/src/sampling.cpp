#include "cobase/sampling.hpp"

#include "cobase/normal.hpp"
#include "cobase/rng.hpp"

namespace cobase {

MarginSample uniform_quantiles(const GaussianMargin& margin, int n) {
  if (n < 1) throw DataError("uniform_quantiles: sample size must be >= 1");
  MarginSample s;
  s.strategy = SampleStrategy::Quantile;
  s.values.resize(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i)
    s.values[static_cast<std::size_t>(i - 1)] =
        margin.quantile(static_cast<double>(i) / (n + 1.0));
  return s;
}

MarginSample random_sample(const GaussianMargin& margin, int n, std::uint64_t seed) {
  if (n < 1) throw DataError("random_sample: sample size must be >= 1");
  Rng rng(seed);
  MarginSample s;
  s.strategy = SampleStrategy::Random;
  s.values.resize(static_cast<std::size_t>(n));
  for (auto& v : s.values) v = margin.mu + margin.sigma * rng.normal();
  return s;
}

MarginSample sample_margin(const GaussianMargin& margin, int n,
                           SampleStrategy strategy, std::uint64_t seed) {
  switch (strategy) {
    case SampleStrategy::Quantile: return uniform_quantiles(margin, n);
    case SampleStrategy::Random: return random_sample(margin, n, seed);
    case SampleStrategy::Stratified:
      throw ConfigError("stratified sampling is not implemented");
  }
  throw InternalError("sample_margin: bad strategy enum");
}

}  // namespace cobase

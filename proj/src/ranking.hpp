#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "cobase/rng.hpp"

namespace cobase::detail {

// Ranks 1..n (1 = smallest) with ties broken by seeded uniform jitter added
// before ranking: magnitude 1e-9 of the value range, or 1e-9 absolute for a
// constant vector. Jitter is drawn unconditionally so the result is a pure
// function of (values, rng state).
inline std::vector<int> rank_vector(std::span<const double> values, Rng& rng,
                                    bool* had_ties = nullptr) {
  const std::size_t n = values.size();
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = hi > lo ? 1e-9 * (hi - lo) : 1e-9;
  std::vector<double> keyed(n);
  for (std::size_t i = 0; i < n; ++i) keyed[i] = values[i] + scale * rng.uniform01();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keyed[a] < keyed[b]; });
  std::vector<int> ranks(n);
  for (std::size_t k = 0; k < n; ++k) ranks[order[k]] = static_cast<int>(k + 1);

  if (had_ties) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    *had_ties = std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
  }
  return ranks;
}

}  // namespace cobase::detail

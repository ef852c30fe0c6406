#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cobase {

// splitmix64 step; also the seed-derivation hash. Derived streams
// (per date, per method, per margin) come from chaining mix_seed.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

// Deterministic random stream. mt19937_64 output is fixed by the standard
// and every variate below is produced by our own transforms, so a seed
// yields the same sequence on any platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // strictly inside (0,1)
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();
  double exponential() ;
  double gamma(double shape);              // scale 1
  std::uint64_t uniform_int(std::uint64_t n);  // uniform on {0,...,n-1}

  // First n slots of a Fisher-Yates shuffle of {0,...,pool-1}.
  std::vector<std::size_t> sample_without_replacement(std::size_t pool, std::size_t n);
  std::vector<std::size_t> permutation(std::size_t n) {
    return sample_without_replacement(n, n);
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace cobase

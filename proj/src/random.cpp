#include "asl/random.hpp"

#include <limits>

namespace asl {

int RandomStream::categorical(std::span<const double> probs) {
  const double u = uniform();
  double cumulative = 0.0;
  for (std::size_t z = 0; z < probs.size(); ++z) {
    cumulative += probs[z];
    if (u < cumulative) return static_cast<int>(z);
  }
  // Rounding can leave the cumulative sum a hair under one.
  for (std::size_t z = probs.size(); z-- > 0;) {
    if (probs[z] > 0.0) return static_cast<int>(z);
  }
  return 0;
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the (seed, stream) pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace asl

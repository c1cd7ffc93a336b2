#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace rankbo {

// std::mt19937_64 output is fixed by the standard; the distributions in
// <random> are not, so sampling goes through the helpers below.
using Rng = std::mt19937_64;

/// Counter-based seed derivation: stream `i` of `master` (splitmix64 finalizer).
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// k distinct indices from [0, n) in sampling order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

}  // namespace rankbo

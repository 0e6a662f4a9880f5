#pragma once

#include <cstdint>
#include <random>

namespace dlh {

using Rng = std::mt19937_64;

/// Seed for run `index` of a batch started from `base`. SplitMix64 finalizer,
/// so neighbouring indices give unrelated engine states.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace dlh

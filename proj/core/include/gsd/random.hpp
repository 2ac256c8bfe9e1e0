#pragma once

#include <cstdint>
#include <random>

namespace gsd {

/// Every random draw in the toolkit comes from this engine.
using Rng = std::mt19937_64;

/// Independent child seed for stream `stream` of a base seed (splitmix64
/// finalizer), so parallel seeds and sub-tasks never share a sequence.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace gsd

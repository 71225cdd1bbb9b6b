#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace btm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and a tuple of indices.
/// Same inputs always give the same seed, so per-node, per-step streams are
/// independent of the order in which nodes are processed.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(master);
  for (auto p : path) {
    h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  }
  return h;
}

/// Stream purposes mixed into derived seeds.
enum class Stream : std::uint64_t {
  kReading = 1,
  kFilter = 2,
  kFaults = 3,
  kRun = 4,
};

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng{derive_seed(master, path)};
}

}  // namespace btm

#pragma once

#include <cstdint>
#include <random>

namespace lvi {

/// Engine used for every stream. std::mt19937_64 is fully specified by the standard,
/// so a (seed, draw count) pair reproduces the same bits on every platform.
using Rng = std::mt19937_64;

/// Disjoint seed subspaces. The tag occupies the top byte of the pre-mix key.
enum class StreamDomain : std::uint8_t {
  kSubordinatorPath = 1,
  kRecordClock = 2,
  kRecordGauss = 3,
  kBenchmarkClock = 4,
  kBenchmarkGauss = 5,
  kPairing = 6,
  kSampler = 7,
};

inline constexpr std::uint64_t kMaxStreamIndex = (std::uint64_t{1} << 56) - 1;

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of stream `index` in `domain` under `base`:
///   mix64(base ^ mix64((domain << 56) | index)).
/// For a fixed base this is a composition of bijections of (domain, index), hence
/// injective for index <= kMaxStreamIndex. Throws DomainError past that range.
std::uint64_t derive_seed(std::uint64_t base, StreamDomain domain, std::uint64_t index);

inline Rng make_stream(std::uint64_t base, StreamDomain domain, std::uint64_t index) {
  return Rng(derive_seed(base, domain, index));
}

}  // namespace lvi

#pragma once

// Counter-based pseudorandom draws: every value is a pure function of its
// key, so results do not depend on call order or thread scheduling.

#include <cstdint>
#include <string_view>

namespace pibench {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a over bytes.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t hash = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

/// Accumulates a key from heterogeneous parts.
class KeyedStream {
 public:
  explicit constexpr KeyedStream(std::uint64_t seed) noexcept : state_(mix64(seed)) {}

  constexpr KeyedStream& add(std::uint64_t part) noexcept {
    state_ = mix64(state_ ^ mix64(part + 0x632be59bd9b4e019ULL));
    return *this;
  }
  constexpr KeyedStream& add(std::string_view part) noexcept { return add(fnv1a64(part)); }

  /// Draw `index` of this key's stream.
  constexpr std::uint64_t bits(std::uint64_t index = 0) const noexcept {
    return mix64(state_ + mix64(index));
  }
  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t index = 0) const noexcept {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }
  /// Uniform integer in [0, bound), bound > 0.
  constexpr std::uint64_t below(std::uint64_t bound, std::uint64_t index = 0) const noexcept {
    // Multiply-shift; bias is < bound / 2^64, irrelevant for vocabulary-sized bounds.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits(index)) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace pibench

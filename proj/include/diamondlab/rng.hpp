#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace diamondlab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit seed is the key, the 128-bit counter is (stream, block). Two
/// generators with the same (seed, stream) produce the same sequence; distinct
/// streams are independent for all practical purposes, which lets each unit
/// of work own a stream without any coordination. Satisfies
/// UniformRandomBitGenerator, so it plugs into <random> distributions.
class Philox {
 public:
  using result_type = std::uint64_t;

  Philox(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// One Philox block: 4 x 32-bit outputs for the given counter and key.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int next_ = 2;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Folds a path of identifiers (experiment tag, replica, level, chunk, ...)
/// into one stream id.
constexpr std::uint64_t stream_id(std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (auto v : path) h = mix64(h ^ mix64(v));
  return h;
}

}  // namespace diamondlab

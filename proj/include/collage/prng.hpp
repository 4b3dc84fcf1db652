#pragma once

#include <cstdint>

namespace collage {

/// SplitMix64 stream. Every draw the simulator makes goes through this type so
/// that a seed fixes the full sequence on any platform.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) from the top 53 bits of one u64.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller: consumes exactly two uniforms, returns
  /// sqrt(-2 ln(1 - u1)) * cos(2 pi u2) and discards the sine partner.
  double normal() noexcept;

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Pure form of one SplitMix64 step: returns the output and advances `state`.
inline std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  Prng p(state);
  const std::uint64_t out = p.next_u64();
  state = p.state();
  return out;
}

}  // namespace collage

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace asaukit {

/// SplitMix64 stream. The full algorithm (state advance, output mix and the
/// derived draws below) is fixed so that any implementation reproduces the
/// same sequence from the same seed; see README "Random streams".
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes exactly two draws per call.
  double normal() noexcept;

  /// Unbiased integer in [0, n) by rejection; n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Forks an independent stream; consumes one draw.
  SplitMix64 fork() noexcept { return SplitMix64(next()); }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Fisher-Yates from the last index down, using below(i + 1).
void shuffle(std::span<std::size_t> items, SplitMix64& rng) noexcept;

/// shuffle applied to 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, SplitMix64& rng);

}  // namespace asaukit

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace hico {

/// Deterministic, splittable random stream.
///
/// Generator: xoshiro256** (Blackman & Vigna, 2018) whose 256-bit state is
/// filled by SplitMix64 from a 64-bit key. Child keys are derived by
/// SplitMix64 finalisation of (parent key, label), so a stream is a pure
/// function of the root seed and the ordered list of labels used to reach it.
/// Algorithm version: kRngVersion. Changing any constant here changes every
/// stochastic output of the project.
class RngStream {
 public:
  static constexpr int kRngVersion = 1;

  explicit RngStream(std::uint64_t seed);

  /// Child stream for `label`. Pure: does not advance this stream.
  [[nodiscard]] RngStream derive(std::uint64_t label) const;
  /// Convenience: label from a string (FNV-1a 64).
  [[nodiscard]] RngStream derive(std::string_view label) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double next_uniform();
  /// Standard normal (Box-Muller, second variate cached).
  double next_gaussian();
  /// Uniform on {0, ..., n-1}; unbiased by rejection. n must be >= 1.
  std::uint64_t next_int(std::uint64_t n);

  [[nodiscard]] std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::array<std::uint64_t, 4> s_{};
  double cached_gaussian_ = 0.0;
  bool has_cached_ = false;
};

/// SplitMix64 finaliser (Steele, Lea & Flood 2014 constants).
std::uint64_t mix64(std::uint64_t z);
/// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace hico

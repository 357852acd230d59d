#include "hico/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hico {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed) : key_(seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x += kGolden;
    word = mix64(x);
  }
  // xoshiro must not start from the all-zero state
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = kGolden;
}

RngStream RngStream::derive(std::uint64_t label) const {
  // Non-commutative in the path: derive(derive(s,a),b) != derive(derive(s,b),a).
  return RngStream(mix64(mix64(key_ + kGolden) ^ mix64(label * kGolden + 0xD1B54A32D192ED03ULL)));
}

RngStream RngStream::derive(std::string_view label) const { return derive(fnv1a64(label)); }

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_gaussian_;
  }
  // 1 - u keeps the log argument in (0, 1]
  const double u1 = 1.0 - next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_gaussian_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

std::uint64_t RngStream::next_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_int: n must be >= 1");
  if (n == 1) return 0;
  // reject the top partial bucket
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

}  // namespace hico

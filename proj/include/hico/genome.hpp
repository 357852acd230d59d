#pragma once

#include <compare>
#include <cstdint>
#include <vector>

namespace hico {

inline constexpr int kGeneLevels = 1000;  // genes take values 0..999
inline constexpr int kBlockSize = 20;     // parameters per block
inline constexpr int kHomogeneousLength = kBlockSize;
inline constexpr int kHeterogeneousLength = 7 * kBlockSize;

enum class Mode { Homogeneous, Heterogeneous };

/// Discretised search encoding; ordering is lexicographic over genes.
struct Genome {
  std::vector<int> genes;

  [[nodiscard]] int size() const { return static_cast<int>(genes.size()); }
  auto operator<=>(const Genome&) const = default;
  bool operator==(const Genome&) const = default;
};

inline int genome_length(Mode mode) {
  return mode == Mode::Homogeneous ? kHomogeneousLength : kHeterogeneousLength;
}

}  // namespace hico

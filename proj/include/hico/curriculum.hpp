#pragma once

#include "hico/connectome.hpp"
#include "hico/genome.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hico {

enum class Strategy { Homogeneous, HeterogeneousFlat, Hico, Reverse, Shuffled };

inline constexpr std::array<Strategy, 5> kAllStrategies = {Strategy::Homogeneous, Strategy::HeterogeneousFlat,
                                                           Strategy::Hico, Strategy::Reverse, Strategy::Shuffled};

/// CLI names: homogeneous, heterogeneous, hico, reverse, shuffled.
std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

enum class OnEnter { None, BroadcastGlobalBlock };

struct Phase {
  std::string name;
  int generations = 0;
  Mode mode = Mode::Heterogeneous;
  std::vector<bool> active_mask;
  OnEnter on_enter = OnEnter::None;
};

struct Schedule {
  Strategy strategy = Strategy::Homogeneous;
  std::vector<Phase> phases;

  [[nodiscard]] int total_generations() const;
  /// Index of the phase that generation `generation` belongs to.
  [[nodiscard]] int phase_at(int generation) const;
  [[nodiscard]] Mode final_mode() const { return phases.back().mode; }
  void validate() const;
};

/// One RSN group per curriculum phase after the global phase, transmodal to
/// unimodal.
const std::vector<std::vector<RsnLabel>>& hico_rsn_order();

/// 140-gene mask with the blocks of `labels` active.
std::vector<bool> rsn_mask(const std::vector<RsnLabel>& labels);

/// Budgets split evenly; the remainder goes one generation each to the
/// earliest phases. Shuffled requires shuffle_seed.
Schedule build_schedule(Strategy strategy, int total_generations,
                        std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// Per-subject permutation seed for the Shuffled strategy.
std::uint64_t shuffle_seed_for(std::uint64_t run_seed, std::string_view subject_id);

/// Copies a 20-gene block into all seven RSN slots.
Genome broadcast_global_block(const Genome& g20);

}  // namespace hico

#include "hico/curriculum.hpp"

#include "hico/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hico {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Homogeneous: return "homogeneous";
    case Strategy::HeterogeneousFlat: return "heterogeneous";
    case Strategy::Hico: return "hico";
    case Strategy::Reverse: return "reverse";
    case Strategy::Shuffled: return "shuffled";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (const auto s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown strategy '" + std::string(name) +
                              "' (expected homogeneous|heterogeneous|hico|reverse|shuffled)");
}

int Schedule::total_generations() const {
  return std::accumulate(phases.begin(), phases.end(), 0, [](int acc, const Phase& p) { return acc + p.generations; });
}

int Schedule::phase_at(int generation) const {
  if (generation < 0) throw std::out_of_range("negative generation");
  int end = 0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    end += phases[i].generations;
    if (generation < end) return static_cast<int>(i);
  }
  throw std::out_of_range("generation " + std::to_string(generation) + " beyond schedule");
}

void Schedule::validate() const {
  if (phases.empty()) throw std::invalid_argument("schedule has no phases");
  for (const auto& p : phases) {
    if (p.generations < 1) throw std::invalid_argument("phase '" + p.name + "' has no generations");
    if (static_cast<int>(p.active_mask.size()) != genome_length(p.mode)) {
      throw std::invalid_argument("phase '" + p.name + "' mask length does not match its mode");
    }
  }
}

const std::vector<std::vector<RsnLabel>>& hico_rsn_order() {
  static const std::vector<std::vector<RsnLabel>> order = {
      {RsnLabel::DefaultMode, RsnLabel::Limbic},
      {RsnLabel::Frontoparietal},
      {RsnLabel::DorsalAttention, RsnLabel::VentralAttention},
      {RsnLabel::Visual},
      {RsnLabel::Somatomotor},
  };
  return order;
}

namespace {

const std::vector<std::string>& group_names() {
  static const std::vector<std::string> names = {"transmodal", "frontoparietal", "attention", "visual", "somatomotor"};
  return names;
}

Phase global_phase(int generations, Mode mode) {
  return Phase{"global", generations, mode, std::vector<bool>(genome_length(mode), true), OnEnter::None};
}

}  // namespace

std::vector<bool> rsn_mask(const std::vector<RsnLabel>& labels) {
  std::vector<bool> mask(kHeterogeneousLength, false);
  for (const auto label : labels) {
    const int start = index_of(label) * kBlockSize;
    std::fill(mask.begin() + start, mask.begin() + start + kBlockSize, true);
  }
  return mask;
}

Schedule build_schedule(Strategy strategy, int total_generations, std::optional<std::uint64_t> shuffle_seed) {
  Schedule schedule;
  schedule.strategy = strategy;
  if (strategy == Strategy::Homogeneous || strategy == Strategy::HeterogeneousFlat) {
    if (total_generations < 1) throw std::invalid_argument("total_generations must be >= 1");
    const Mode mode = strategy == Strategy::Homogeneous ? Mode::Homogeneous : Mode::Heterogeneous;
    schedule.phases.push_back(global_phase(total_generations, mode));
    return schedule;
  }
  if (strategy == Strategy::Shuffled && !shuffle_seed) {
    throw std::invalid_argument("shuffled strategy requires a shuffle seed");
  }
  constexpr int kPhases = 6;
  if (total_generations < kPhases) throw std::invalid_argument("curricula need at least 6 generations");

  std::vector<int> order(hico_rsn_order().size());
  std::iota(order.begin(), order.end(), 0);
  if (strategy == Strategy::Reverse) {
    std::reverse(order.begin(), order.end());
  } else if (strategy == Strategy::Shuffled) {
    RngStream rng(*shuffle_seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng.next_int(i + 1)]);
    }
  }

  const int base = total_generations / kPhases;
  const int extra = total_generations % kPhases;
  auto budget = [&](int phase) { return base + (phase < extra ? 1 : 0); };

  schedule.phases.push_back(global_phase(budget(0), Mode::Homogeneous));
  for (int k = 0; k < static_cast<int>(order.size()); ++k) {
    const int group = order[k];
    schedule.phases.push_back(Phase{group_names()[group], budget(k + 1), Mode::Heterogeneous,
                                    rsn_mask(hico_rsn_order()[group]),
                                    k == 0 ? OnEnter::BroadcastGlobalBlock : OnEnter::None});
  }
  return schedule;
}

std::uint64_t shuffle_seed_for(std::uint64_t run_seed, std::string_view subject_id) {
  return RngStream(run_seed).derive("shuffle").derive(subject_id).key();
}

Genome broadcast_global_block(const Genome& g20) {
  if (g20.size() != kHomogeneousLength) {
    throw std::invalid_argument("broadcast_global_block: expected 20 genes, got " + std::to_string(g20.size()));
  }
  Genome out;
  out.genes.reserve(kHeterogeneousLength);
  for (int r = 0; r < kNumRsn; ++r) out.genes.insert(out.genes.end(), g20.genes.begin(), g20.genes.end());
  return out;
}

}  // namespace hico

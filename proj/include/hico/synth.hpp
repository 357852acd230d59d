#pragma once

#include "hico/connectome.hpp"
#include "hico/dmf.hpp"

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

namespace hico {

using Truth = std::variant<DmfParams, RsnParamTable>;

/// Behaviour target names written by the generator. target_0 follows the
/// DefaultMode latent, target_1 the Frontoparietal/DorsalAttention pair,
/// target_2 is pure noise.
inline constexpr int kSynthTargets = 3;

struct SynthConfig {
  int n_regions = 28;
  int regions_per_rsn = 4;
  int n_subjects = 10;
  double noise_level = 0.1;
  std::uint64_t seed = 0;
  bool with_targets = true;
  int max_attempts = 100;
  /// Shift of each RSN block's I_b per unit latent, scaled by noise_level.
  double param_coupling = 0.1;
  /// Log-scale spread of the lognormal base SC entries.
  double sc_log_sd = 1.5;
};

/// Per subject s and RSN r a standard-normal latent u[s][r] scales the
/// within-RSN SC perturbation and shifts I_b of block r by
/// param_coupling * noise_level * u[s][r].
struct SynthCohort {
  Cohort cohort;
  std::vector<std::vector<double>> subject_truth;  // 140 physical values each
  std::vector<std::array<double, kNumRsn>> latents;
};

/// Gene-quantised homogeneous truth used by default: every parameter sits
/// exactly on the genome grid so a genome can reproduce it.
DmfParams default_truth();
/// RSN-varying truth: a few parameters vary linearly along the RSN order.
RsnParamTable heterogeneous_truth();

/// Modular random SC and moments-model FC per subject. Deterministic in all
/// arguments. Throws DataError when a subject stays unstable after
/// max_attempts SC regenerations.
SynthCohort synth_cohort(const SynthConfig& config, const Truth& truth);

/// Physical-parameter vector for a truth (20 or 140 values).
std::vector<double> truth_vector(const Truth& truth);

}  // namespace hico

#include "hico/synth.hpp"

#include "hico/fitness.hpp"
#include "hico/lyapunov.hpp"
#include "hico/rng.hpp"

#include <array>
#include <cmath>
#include <string>

namespace hico {

namespace {

DmfParams quantise(const DmfParams& p) {
  const auto ranges = ParamRanges::defaults();
  const auto arr = p.to_array();
  const Genome g = to_genome(arr, ranges);
  const auto phys = to_physical(g, ranges);
  return DmfParams::from_array(phys);
}

RsnParamTable as_table(const Truth& truth) {
  if (const auto* p = std::get_if<DmfParams>(&truth)) return RsnParamTable::uniform(*p);
  return std::get<RsnParamTable>(truth);
}

/// Symmetric lognormal weights, mean 3 within an RSN and 1 between.
Matrix base_weights(const Parcellation& parcellation, double log_sd, RngStream rng) {
  const int n = parcellation.n_regions();
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double mean = parcellation.rsn_of(i) == parcellation.rsn_of(j) ? 3.0 : 1.0;
      const double v = mean * std::exp(log_sd * rng.next_gaussian() - 0.5 * log_sd * log_sd);
      w(i, j) = v;
      w(j, i) = v;
    }
  }
  return w;
}

Matrix row_normalised(Matrix w) {
  w.diagonal().setZero();
  for (Eigen::Index i = 0; i < w.rows(); ++i) w.row(i) /= w.row(i).sum();
  return w;
}

}  // namespace

DmfParams default_truth() {
  // Monostable regime with moderate, SC-shaped FC; small sigma keeps the
  // linearisation accurate.
  DmfParams p;
  p.W_E = 0.97;
  p.W_I = 1.01;
  p.w_EE = 1.03;
  p.w_EI = 1.0;
  p.w_IE = 0.54;
  p.w_II = 1.35;
  p.I_b = 0.351;
  p.J = 0.096;
  p.g = 0.96;
  p.sigma = 0.001;
  return quantise(p);
}

RsnParamTable heterogeneous_truth() {
  const DmfParams base = default_truth();
  RsnParamTable table;
  for (int r = 0; r < kNumRsn; ++r) {
    const double t = (r - 3) / 3.0;
    DmfParams p = base;
    p.sigma = base.sigma * (1.0 + 0.4 * t);
    p.I_b = base.I_b + 0.01 * t;
    p.w_EE = base.w_EE - 0.05 * t;
    table.per_rsn[r] = quantise(p);
  }
  return table;
}

std::vector<double> truth_vector(const Truth& truth) {
  if (const auto* p = std::get_if<DmfParams>(&truth)) {
    const auto arr = p->to_array();
    return {arr.begin(), arr.end()};
  }
  return std::get<RsnParamTable>(truth).flatten();
}

SynthCohort synth_cohort(const SynthConfig& config, const Truth& truth) {
  if (config.regions_per_rsn < 1 || config.n_regions != kNumRsn * config.regions_per_rsn) {
    throw std::invalid_argument("n_regions (" + std::to_string(config.n_regions) + ") must equal 7 x regions_per_rsn (" +
                                std::to_string(config.regions_per_rsn) + ")");
  }
  if (config.n_subjects < 1) throw std::invalid_argument("n_subjects must be >= 1");
  if (!(config.noise_level >= 0.0)) throw std::invalid_argument("noise_level must be >= 0");

  Parcellation parcellation = Parcellation::blocks(config.regions_per_rsn);
  const RsnParamTable base_table = as_table(truth);
  const int n = config.n_regions;
  const RngStream root(config.seed);
  const Matrix base = base_weights(parcellation, config.sc_log_sd, root.derive("base-sc"));

  SynthCohort out{Cohort{parcellation, {}}, {}, {}};
  for (int s = 0; s < config.n_subjects; ++s) {
    const RngStream subject_rng = root.derive("subject").derive(static_cast<std::uint64_t>(s));
    std::array<double, kNumRsn> latent{};
    {
      RngStream r = subject_rng.derive("latent");
      for (auto& u : latent) u = r.next_gaussian();
    }
    RsnParamTable table = base_table;
    for (int r = 0; r < kNumRsn; ++r) table.per_rsn[r].I_b += config.param_coupling * config.noise_level * latent[r];
    const RegionParams params = assign_regions(table, parcellation);
    SubjectRecord rec;
    rec.id = "sub-" + std::string(s < 10 ? "0" : "") + std::to_string(s);
    bool done = false;
    std::string last_error;
    for (int attempt = 0; attempt < config.max_attempts && !done; ++attempt) {
      RngStream r = subject_rng.derive("sc").derive(static_cast<std::uint64_t>(attempt));
      Matrix w = base;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const RsnLabel li = parcellation.rsn_of(i);
          const double shared = li == parcellation.rsn_of(j) ? latent[index_of(li)] : 0.0;
          const double factor = std::exp(config.noise_level * (shared + r.next_gaussian()));
          w(i, j) *= factor;
          w(j, i) *= factor;
        }
      }
      rec.sc = StructuralConnectome(row_normalised(std::move(w)));
      try {
        rec.fc_empirical = moments_fc(params, rec.sc);
        done = true;
      } catch (const NoFixedPointError& e) {
        last_error = e.what();
      } catch (const UnstableSystemError& e) {
        last_error = e.what();
      }
    }
    if (!done) {
      throw DataError("synth_cohort: truth unstable on subject " + rec.id + " after " +
                      std::to_string(config.max_attempts) + " attempts: " + last_error);
    }
    if (config.with_targets) {
      RngStream r = subject_rng.derive("targets");
      const double e0 = r.next_gaussian(), e1 = r.next_gaussian(), e2 = r.next_gaussian();
      rec.behavior["target_0"] = latent[index_of(RsnLabel::DefaultMode)] + 0.5 * e0;
      rec.behavior["target_1"] =
          0.5 * (latent[index_of(RsnLabel::Frontoparietal)] + latent[index_of(RsnLabel::DorsalAttention)]) + 0.5 * e1;
      rec.behavior["target_2"] = e2;
    }
    out.cohort.subjects.push_back(std::move(rec));
    out.subject_truth.push_back(table.flatten());
    out.latents.push_back(latent);
  }
  return out;
}

}  // namespace hico

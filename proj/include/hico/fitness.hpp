#pragma once

#include "hico/connectome.hpp"
#include "hico/dmf.hpp"
#include "hico/genome.hpp"
#include "hico/hemodynamics.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace hico {

enum class Backend { Simulation, Moments };

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view name);

/// Invariant: !stable implies score == 0.
struct FitnessReport {
  double score = 0.0;
  Backend backend = Backend::Moments;
  bool stable = false;
  std::string detail;

  bool operator==(const FitnessReport&) const = default;
};

/// Configuration the moments backend cannot represent (nonzero delays).
class UnsupportedConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kVarianceFloor = 1e-15;

/// Pearson FC of a samples x regions series. Columns with variance below
/// kVarianceFloor correlate 0 with everything; the diagonal is always 1.
Matrix compute_fc(const Matrix& series);

/// Covariance -> correlation with the same zero-variance rule.
Matrix covariance_to_correlation(const Matrix& covariance);

/// Pearson correlation of the strictly-upper triangles (1 - L). Returns 0 and
/// sets *diagnostic when either vector has variance below kVarianceFloor.
double fc_fitness(const Matrix& fc_emp, const Matrix& fc_sim, std::string* diagnostic = nullptr);

/// Stationary covariance of the linearised system around its fixed point,
/// ordered [S_E; S_I]. Throws NoFixedPointError / UnstableSystemError.
Matrix moments_covariance(const RegionParams& params, const StructuralConnectome& sc);
/// Excitatory block of moments_covariance as a correlation matrix.
Matrix moments_fc(const RegionParams& params, const StructuralConnectome& sc);

FitnessReport moments_fitness(const RegionParams& params, const SubjectRecord& subject);
FitnessReport moments_fitness(const Genome& genome, const ParamRanges& ranges, Mode mode,
                              const Parcellation& parcellation, const SubjectRecord& subject);

struct SimConfig {
  double duration_ms = 300'000.0;
  double dt_ms = 0.1;
  double sample_every_ms = 10.0;
  double transient_ms = 2'000.0;
  double tr_ms = 720.0;
  std::uint64_t seed = 0;
  HemoConstants hemo{};
};

/// simulate -> BOLD -> FC. The balloon model starts at the equilibrium of each
/// region's mean drive, so no start-up transient enters the FC.
Matrix simulated_bold_fc(const RegionParams& params, const StructuralConnectome& sc, const SimConfig& config);

FitnessReport simulation_fitness(const RegionParams& params, const SubjectRecord& subject, const SimConfig& config);
FitnessReport simulation_fitness(const Genome& genome, const ParamRanges& ranges, Mode mode,
                                 const Parcellation& parcellation, const SubjectRecord& subject,
                                 const SimConfig& config);

using Evaluator = std::function<FitnessReport(const Genome&)>;

/// Genome evaluator bound to one subject; copies its inputs, safe to call
/// concurrently.
Evaluator make_evaluator(Backend backend, ParamRanges ranges, Parcellation parcellation, SubjectRecord subject,
                         SimConfig sim = {});

}  // namespace hico

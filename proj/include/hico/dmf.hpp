#pragma once

#include "hico/connectome.hpp"
#include "hico/genome.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace hico {

/// The 20 optimised biophysical parameters of one block, in genome order.
/// Time constants in ms, offsets in Hz, curvatures in s, currents in nA.
struct DmfParams {
  double a_E = 310.0;
  double b_E = 125.0;
  double d_E = 0.16;
  double W_E = 1.0;
  double tau_E = 100.0;
  double a_I = 615.0;
  double b_I = 177.0;
  double d_I = 0.087;
  double W_I = 0.7;
  double tau_I = 10.0;
  double w_EE = 1.4;
  double w_EI = 1.0;
  double w_IE = 1.0;
  double w_II = 0.5;
  double I_b = 0.382;
  double J = 0.15;
  double gamma = 0.641;
  double gamma_I = 1.0;
  double sigma = 0.01;
  double g = 2.5;

  static constexpr int kCount = kBlockSize;

  double& operator[](int index);
  double operator[](int index) const;
  [[nodiscard]] std::array<double, kCount> to_array() const;
  static DmfParams from_array(std::span<const double> values);
  static const std::array<std::string_view, kCount>& names();

  bool operator==(const DmfParams&) const = default;
};

/// One parameter block per resting-state network, indexed by RsnLabel.
struct RsnParamTable {
  std::array<DmfParams, kNumRsn> per_rsn;

  static RsnParamTable uniform(const DmfParams& p);
  DmfParams& operator[](RsnLabel label) { return per_rsn[index_of(label)]; }
  const DmfParams& operator[](RsnLabel label) const { return per_rsn[index_of(label)]; }
  /// Flattened 140-vector in RSN block order.
  [[nodiscard]] std::vector<double> flatten() const;
};

/// Affine bounds for each gene index; defaults are the literature ranges.
struct ParamRanges {
  std::array<double, DmfParams::kCount> lo;
  std::array<double, DmfParams::kCount> hi;

  static ParamRanges defaults();
  void validate() const;
};

/// Region-wise parameter assignment (one block per region).
using RegionParams = std::vector<DmfParams>;

class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  [[nodiscard]] long step() const { return step_; }

 private:
  long step_;
};

class NoFixedPointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Mode mode_for_length(int length);

/// Gene -> physical value: lo + gene/999 * (hi - lo). Length 20 or 140.
std::vector<double> to_physical(const Genome& genome, const ParamRanges& ranges);
/// Nearest-gene quantisation of a physical vector (clamped into range).
Genome to_genome(std::span<const double> physical, const ParamRanges& ranges);
/// Physical 20-vector broadcast to every region, or 140-vector assigned by label.
RegionParams assign_regions(std::span<const double> physical, const Parcellation& parcellation);
RegionParams assign_regions(const RsnParamTable& table, const Parcellation& parcellation);
RegionParams decode(const Genome& genome, const ParamRanges& ranges, Mode mode, const Parcellation& parcellation);

/// Firing rate H(x) = x / (1 - exp(-d x)), x = a I - b, in Hz.
double transfer(double current, double a, double b, double d);
/// dH/dx (dimensionless); 1/2 at x = 0.
double transfer_slope(double x, double d);

struct NeuralState {
  Vector S_E;
  Vector S_I;

  static NeuralState uniform(int n, double value);
  [[nodiscard]] int size() const { return static_cast<int>(S_E.size()); }
};

/// Precomputed per-region coefficients of the coupled E-I drift. Cheap to
/// evaluate repeatedly; shared by simulation, fixed-point and Jacobian code.
class DmfSystem {
 public:
  DmfSystem(const RegionParams& params, const StructuralConnectome& sc);

  [[nodiscard]] int n() const { return n_; }
  void drift(const Vector& s_e, const Vector& s_i, Vector& ds_e, Vector& ds_i) const;
  [[nodiscard]] Matrix jacobian(const Vector& s_e, const Vector& s_i) const;
  [[nodiscard]] const Eigen::ArrayXd& sigma() const { return sigma_; }

 private:
  int n_;
  Matrix sc_;
  Eigen::ArrayXd a_e_, b_e_, d_e_, a_i_, b_i_, d_i_;
  Eigen::ArrayXd inv_tau_e_, inv_tau_i_, gamma_, gamma_i_, sigma_;
  Eigen::ArrayXd k_ee_, k_ei_, k_glob_, k_ie_, k_ii_, i_b_;
  // scratch reused by drift(); a DmfSystem is not shared across threads
  mutable Vector coupling_;
  mutable Eigen::ArrayXd current_e_, current_i_, x_scratch_, h_e_, h_i_;
};

NeuralState drift(const NeuralState& state, const RegionParams& params, const StructuralConnectome& sc);

struct SimulationOptions {
  double duration_ms = 300'000.0;  // recorded span, after the transient
  double dt_ms = 0.1;
  double sample_every_ms = 10.0;
  double transient_ms = 2'000.0;
  std::uint64_t seed = 0;
  std::optional<NeuralState> initial;  // default S_E = S_I = 0.1
};

struct Trajectory {
  double sample_every_ms = 0.0;
  Matrix S_E;  // samples x regions
  Matrix S_I;
};

/// Euler-Maruyama integration; throws InstabilityError on a non-finite state.
Trajectory simulate(const RegionParams& params, const StructuralConnectome& sc, const SimulationOptions& options);

struct FixedPointOptions {
  double step_ms = 1.0;
  double tolerance = 1e-10;
  int max_iterations = 50'000;
  /// Newton polishing starts once max|drift| falls below this; 0 disables it.
  /// Early polishing can leave the basin the flow is heading for when the
  /// trajectory passes close to a saddle; see conservative().
  double newton_threshold = 1e-3;

  /// Damped iteration almost to tolerance before any Newton step.
  static FixedPointOptions conservative() {
    FixedPointOptions o;
    o.newton_threshold = 1e-8;
    return o;
  }
};

struct FixedPointStats {
  int iterations = 0;
  int newton_steps = 0;
  double newton_started_at = 0.0;  // residual when polishing began; 0 if never
  double residual = 0.0;
};

/// Damped iteration S <- S + step * drift(S) from S_E = S_I = 0.1, finished by
/// Newton polishing. Throws NoFixedPointError when max|drift| stays above
/// tolerance.
NeuralState find_fixed_point(const RegionParams& params, const StructuralConnectome& sc,
                             const FixedPointOptions& options = {}, FixedPointStats* stats = nullptr);

/// Analytic 2N x 2N Jacobian of the drift, ordered [S_E; S_I].
Matrix jacobian(const RegionParams& params, const StructuralConnectome& sc, const NeuralState& state);

}  // namespace hico

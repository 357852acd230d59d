#include "hico/dmf.hpp"

#include "hico/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hico {

namespace {

using Field = double DmfParams::*;

constexpr std::array<Field, DmfParams::kCount> kFields = {
    &DmfParams::a_E,  &DmfParams::b_E,  &DmfParams::d_E,  &DmfParams::W_E,     &DmfParams::tau_E,
    &DmfParams::a_I,  &DmfParams::b_I,  &DmfParams::d_I,  &DmfParams::W_I,     &DmfParams::tau_I,
    &DmfParams::w_EE, &DmfParams::w_EI, &DmfParams::w_IE, &DmfParams::w_II,    &DmfParams::I_b,
    &DmfParams::J,    &DmfParams::gamma, &DmfParams::gamma_I, &DmfParams::sigma, &DmfParams::g};

constexpr std::array<std::string_view, DmfParams::kCount> kNames = {
    "a_E",  "b_E",  "d_E",  "W_E",  "tau_E", "a_I", "b_I",   "d_I",     "W_I",   "tau_I",
    "w_EE", "w_EI", "w_IE", "w_II", "I_b",   "J",   "gamma", "gamma_I", "sigma", "g"};

// Hz -> 1/ms
constexpr double kRateScale = 1e-3;

long checked_ratio(double numerator, double denominator, const char* what) {
  const double ratio = numerator / denominator;
  const long rounded = std::lround(ratio);
  if (rounded < 0 || std::abs(ratio - static_cast<double>(rounded)) > 1e-6) {
    throw std::invalid_argument(std::string(what) + " must be a whole multiple of dt_ms");
  }
  return rounded;
}

}  // namespace

double& DmfParams::operator[](int index) { return this->*kFields.at(index); }
double DmfParams::operator[](int index) const { return this->*kFields.at(index); }

std::array<double, DmfParams::kCount> DmfParams::to_array() const {
  std::array<double, kCount> out{};
  for (int k = 0; k < kCount; ++k) out[k] = (*this)[k];
  return out;
}

DmfParams DmfParams::from_array(std::span<const double> values) {
  if (values.size() != kCount) throw std::invalid_argument("DmfParams needs exactly 20 values");
  DmfParams p;
  for (int k = 0; k < kCount; ++k) p[k] = values[k];
  return p;
}

const std::array<std::string_view, DmfParams::kCount>& DmfParams::names() { return kNames; }

RsnParamTable RsnParamTable::uniform(const DmfParams& p) {
  RsnParamTable t;
  t.per_rsn.fill(p);
  return t;
}

std::vector<double> RsnParamTable::flatten() const {
  std::vector<double> out;
  out.reserve(kHeterogeneousLength);
  for (const auto& block : per_rsn) {
    const auto a = block.to_array();
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

ParamRanges ParamRanges::defaults() {
  return ParamRanges{
      {200.0, 100.0, 0.1, 0.5, 50.0, 400.0, 150.0, 0.05, 0.3, 5.0, 0.5, 0.5, 0.5, 0.1, 0.2, 0.05, 0.3, 0.5, 0.001, 0.0},
      {400.0, 150.0, 0.3, 2.0, 200.0, 800.0, 220.0, 0.15, 1.5, 20.0, 2.5, 2.0, 2.0, 1.5, 0.6, 0.3, 1.0, 1.5, 0.05, 5.0}};
}

void ParamRanges::validate() const {
  for (int k = 0; k < DmfParams::kCount; ++k) {
    if (!(lo[k] < hi[k])) {
      throw std::invalid_argument("parameter range for " + std::string(kNames[k]) + " is empty");
    }
  }
}

// ---------------------------------------------------------------------------

Mode mode_for_length(int length) {
  if (length == kHomogeneousLength) return Mode::Homogeneous;
  if (length == kHeterogeneousLength) return Mode::Heterogeneous;
  throw std::invalid_argument("genome length must be 20 or 140, got " + std::to_string(length));
}

std::vector<double> to_physical(const Genome& genome, const ParamRanges& ranges) {
  mode_for_length(genome.size());
  std::vector<double> out(genome.genes.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const int gene = genome.genes[k];
    if (gene < 0 || gene >= kGeneLevels) {
      throw std::invalid_argument("gene " + std::to_string(k) + " out of range: " + std::to_string(gene));
    }
    const auto p = k % kBlockSize;
    out[k] = ranges.lo[p] + (static_cast<double>(gene) / (kGeneLevels - 1)) * (ranges.hi[p] - ranges.lo[p]);
  }
  return out;
}

Genome to_genome(std::span<const double> physical, const ParamRanges& ranges) {
  mode_for_length(static_cast<int>(physical.size()));
  Genome g;
  g.genes.resize(physical.size());
  for (std::size_t k = 0; k < physical.size(); ++k) {
    const auto p = k % kBlockSize;
    const double unit = (physical[k] - ranges.lo[p]) / (ranges.hi[p] - ranges.lo[p]);
    g.genes[k] = static_cast<int>(std::clamp(std::lround(unit * (kGeneLevels - 1)), 0L, long{kGeneLevels - 1}));
  }
  return g;
}

RegionParams assign_regions(std::span<const double> physical, const Parcellation& parcellation) {
  const auto mode = mode_for_length(static_cast<int>(physical.size()));
  std::array<DmfParams, kNumRsn> blocks;
  for (int r = 0; r < kNumRsn; ++r) {
    const auto offset = mode == Mode::Homogeneous ? 0 : r * kBlockSize;
    blocks[r] = DmfParams::from_array(physical.subspan(offset, kBlockSize));
  }
  RegionParams out;
  out.reserve(parcellation.n_regions());
  for (auto label : parcellation.labels()) out.push_back(blocks[index_of(label)]);
  return out;
}

RegionParams assign_regions(const RsnParamTable& table, const Parcellation& parcellation) {
  const auto flat = table.flatten();
  return assign_regions(flat, parcellation);
}

RegionParams decode(const Genome& genome, const ParamRanges& ranges, Mode mode, const Parcellation& parcellation) {
  if (genome.size() != genome_length(mode)) {
    throw std::invalid_argument("genome length " + std::to_string(genome.size()) + " does not match mode (" +
                                std::to_string(genome_length(mode)) + ")");
  }
  return assign_regions(to_physical(genome, ranges), parcellation);
}

// ---------------------------------------------------------------------------

double transfer(double current, double a, double b, double d) {
  const double x = a * current - b;
  if (std::abs(x) < 1e-9) return 1.0 / d;
  const double t = d * x;
  if (t < -700.0) return 0.0;
  return x / -std::expm1(-t);
}

double transfer_slope(double x, double d) {
  const double t = d * x;
  if (std::abs(t) < 1e-4) return 0.5 + t / 6.0 - t * t * t / 180.0;
  if (t < 0.0) {
    if (t < -700.0) return 0.0;
    // rewritten with r = e^t so nothing overflows
    const double r = std::exp(t);
    const double one_minus_r = -std::expm1(t);
    return r * (std::expm1(t) - t) / (one_minus_r * one_minus_r);
  }
  const double e = std::exp(-t);
  const double one_minus_e = -std::expm1(-t);
  return (one_minus_e - t * e) / (one_minus_e * one_minus_e);
}

NeuralState NeuralState::uniform(int n, double value) {
  return NeuralState{Vector::Constant(n, value), Vector::Constant(n, value)};
}

// ---------------------------------------------------------------------------

DmfSystem::DmfSystem(const RegionParams& params, const StructuralConnectome& sc)
    : n_(sc.n_regions()), sc_(sc.weights) {
  if (static_cast<int>(params.size()) != n_) {
    throw std::invalid_argument("parameter assignment has " + std::to_string(params.size()) +
                                " regions; SC has " + std::to_string(n_));
  }
  auto fill = [&](auto fn) {
    Eigen::ArrayXd a(n_);
    for (int i = 0; i < n_; ++i) a[i] = fn(params[i]);
    return a;
  };
  a_e_ = fill([](const DmfParams& p) { return p.a_E; });
  b_e_ = fill([](const DmfParams& p) { return p.b_E; });
  d_e_ = fill([](const DmfParams& p) { return p.d_E; });
  a_i_ = fill([](const DmfParams& p) { return p.a_I; });
  b_i_ = fill([](const DmfParams& p) { return p.b_I; });
  d_i_ = fill([](const DmfParams& p) { return p.d_I; });
  inv_tau_e_ = fill([](const DmfParams& p) { return 1.0 / p.tau_E; });
  inv_tau_i_ = fill([](const DmfParams& p) { return 1.0 / p.tau_I; });
  gamma_ = fill([](const DmfParams& p) { return p.gamma; });
  gamma_i_ = fill([](const DmfParams& p) { return p.gamma_I; });
  sigma_ = fill([](const DmfParams& p) { return p.sigma; });
  // J converts gating to current; W_E / W_I scale the recurrent blocks
  k_ee_ = fill([](const DmfParams& p) { return p.W_E * p.J * p.w_EE; });
  k_ei_ = fill([](const DmfParams& p) { return p.J * p.w_EI; });
  k_glob_ = fill([](const DmfParams& p) { return p.g * p.J; });
  k_ie_ = fill([](const DmfParams& p) { return p.W_I * p.J * p.w_IE; });
  k_ii_ = fill([](const DmfParams& p) { return p.J * p.w_II; });
  i_b_ = fill([](const DmfParams& p) { return p.I_b; });
  for (int i = 0; i < n_; ++i) {
    if (!(params[i].tau_E > 0 && params[i].tau_I > 0 && params[i].d_E > 0 && params[i].d_I > 0)) {
      throw std::invalid_argument("time constants and curvatures must be positive");
    }
  }
  coupling_.resize(n_);
  current_e_.resize(n_);
  current_i_.resize(n_);
}

namespace {

// Vectorised transfer over all regions. exp(-t) loses relative accuracy as
// |t| -> 0, so entries with |t| < 0.5 are recomputed with the scalar expm1 form.
void transfer_all(const Eigen::ArrayXd& current, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b,
                  const Eigen::ArrayXd& d, Eigen::ArrayXd& x, Eigen::ArrayXd& out) {
  x = a * current - b;
  out = x / (1.0 - (-d * x).exp());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double t = d[i] * x[i];
    if (!(std::abs(t) >= 0.5) || t < -700.0) out[i] = transfer(current[i], a[i], b[i], d[i]);
  }
}

}  // namespace

void DmfSystem::drift(const Vector& s_e, const Vector& s_i, Vector& ds_e, Vector& ds_i) const {
  coupling_.noalias() = sc_ * s_e;
  current_e_ = i_b_ + k_ee_ * s_e.array() - k_ei_ * s_i.array() + k_glob_ * coupling_.array();
  current_i_ = k_ie_ * s_e.array() - k_ii_ * s_i.array();
  transfer_all(current_e_, a_e_, b_e_, d_e_, x_scratch_, h_e_);
  transfer_all(current_i_, a_i_, b_i_, d_i_, x_scratch_, h_i_);
  ds_e = (-s_e.array() * inv_tau_e_ + (1.0 - s_e.array()) * gamma_ * h_e_ * kRateScale).matrix();
  ds_i = (-s_i.array() * inv_tau_i_ + gamma_i_ * h_i_ * kRateScale).matrix();
}

Matrix DmfSystem::jacobian(const Vector& s_e, const Vector& s_i) const {
  const Vector coupling = sc_ * s_e;
  Matrix jac = Matrix::Zero(2 * n_, 2 * n_);
  for (int i = 0; i < n_; ++i) {
    const double cur_e = i_b_[i] + k_ee_[i] * s_e[i] - k_ei_[i] * s_i[i] + k_glob_[i] * coupling[i];
    const double cur_i = k_ie_[i] * s_e[i] - k_ii_[i] * s_i[i];
    const double h_e = transfer(cur_e, a_e_[i], b_e_[i], d_e_[i]);
    // dH/dI = a * H'(x)
    const double dh_e = a_e_[i] * transfer_slope(a_e_[i] * cur_e - b_e_[i], d_e_[i]);
    const double dh_i = a_i_[i] * transfer_slope(a_i_[i] * cur_i - b_i_[i], d_i_[i]);
    const double gain_e = (1.0 - s_e[i]) * gamma_[i] * kRateScale * dh_e;
    const double gain_i = gamma_i_[i] * kRateScale * dh_i;

    for (int j = 0; j < n_; ++j) jac(i, j) = gain_e * k_glob_[i] * sc_(i, j);
    jac(i, i) += -inv_tau_e_[i] - gamma_[i] * h_e * kRateScale + gain_e * k_ee_[i];
    jac(i, n_ + i) = -gain_e * k_ei_[i];
    jac(n_ + i, i) = gain_i * k_ie_[i];
    jac(n_ + i, n_ + i) = -inv_tau_i_[i] - gain_i * k_ii_[i];
  }
  return jac;
}

NeuralState drift(const NeuralState& state, const RegionParams& params, const StructuralConnectome& sc) {
  const DmfSystem system(params, sc);
  NeuralState out;
  system.drift(state.S_E, state.S_I, out.S_E, out.S_I);
  return out;
}

Matrix jacobian(const RegionParams& params, const StructuralConnectome& sc, const NeuralState& state) {
  return DmfSystem(params, sc).jacobian(state.S_E, state.S_I);
}

// ---------------------------------------------------------------------------

Trajectory simulate(const RegionParams& params, const StructuralConnectome& sc, const SimulationOptions& options) {
  if (!(options.dt_ms > 0.0)) throw std::invalid_argument("dt_ms must be positive");
  if (!(options.duration_ms >= options.dt_ms)) throw std::invalid_argument("duration_ms must be >= dt_ms");
  if (options.transient_ms < 0.0) throw std::invalid_argument("transient_ms must be >= 0");

  const DmfSystem system(params, sc);
  const int n = system.n();
  const long per_sample = checked_ratio(options.sample_every_ms, options.dt_ms, "sample_every_ms");
  const long transient_steps = checked_ratio(options.transient_ms, options.dt_ms, "transient_ms");
  const long record_steps = checked_ratio(options.duration_ms, options.dt_ms, "duration_ms");
  if (per_sample < 1) throw std::invalid_argument("sample_every_ms must be >= dt_ms");
  const long total_steps = transient_steps + record_steps;
  const long n_samples = total_steps / per_sample - transient_steps / per_sample;

  Vector s_e = options.initial ? options.initial->S_E : Vector::Constant(n, 0.1);
  Vector s_i = options.initial ? options.initial->S_I : Vector::Constant(n, 0.1);
  if (s_e.size() != n || s_i.size() != n) throw std::invalid_argument("initial state has wrong size");

  Trajectory out;
  out.sample_every_ms = options.sample_every_ms;
  out.S_E.resize(n_samples, n);
  out.S_I.resize(n_samples, n);

  RngStream noise = RngStream(options.seed).derive("euler-maruyama");
  const double dt = options.dt_ms;
  const Eigen::ArrayXd noise_scale = system.sigma() * std::sqrt(dt);
  Vector ds_e(n), ds_i(n);
  long row = 0;
  for (long step = 1; step <= total_steps; ++step) {
    system.drift(s_e, s_i, ds_e, ds_i);
    for (int i = 0; i < n; ++i) s_e[i] += ds_e[i] * dt + noise_scale[i] * noise.next_gaussian();
    for (int i = 0; i < n; ++i) s_i[i] += ds_i[i] * dt + noise_scale[i] * noise.next_gaussian();
    if (!std::isfinite(s_e.sum() + s_i.sum())) {
      throw InstabilityError("non-finite neural state at step " + std::to_string(step), step);
    }
    s_e = s_e.cwiseMax(0.0).cwiseMin(1.0);
    s_i = s_i.cwiseMax(0.0);
    if (step % per_sample == 0 && step > transient_steps) {
      out.S_E.row(row) = s_e.transpose();
      out.S_I.row(row) = s_i.transpose();
      ++row;
    }
  }
  return out;
}

NeuralState find_fixed_point(const RegionParams& params, const StructuralConnectome& sc,
                             const FixedPointOptions& options, FixedPointStats* stats) {
  const DmfSystem system(params, sc);
  const int n = system.n();
  FixedPointStats local;
  Vector s_e = Vector::Constant(n, 0.1);
  Vector s_i = Vector::Constant(n, 0.1);
  Vector ds_e(n), ds_i(n);

  auto residual = [&](const Vector& e, const Vector& i) {
    system.drift(e, i, ds_e, ds_i);
    return std::max(ds_e.cwiseAbs().maxCoeff(), ds_i.cwiseAbs().maxCoeff());
  };
  auto done = [&](const Vector& e, const Vector& i, double res) {
    local.residual = res;
    if (stats) *stats = local;
    return NeuralState{e, i};
  };

  // Newton runs on a copy and is kept only if it reaches tolerance; otherwise
  // the damped iteration continues untouched and polishing is retried once the
  // residual has fallen another hundredfold.
  double next_newton = options.newton_threshold;
  double res = residual(s_e, s_i);
  for (int it = 0; it < options.max_iterations; ++it) {
    local.iterations = it;
    if (!std::isfinite(res)) break;
    if (res < options.tolerance) return done(s_e, s_i, res);
    if (res < next_newton) {
      if (local.newton_started_at == 0.0) local.newton_started_at = res;
      Vector t_e = s_e, t_i = s_i;
      double t_res = res;
      for (int k = 0; k < 20 && t_res >= options.tolerance; ++k) {
        Vector f(2 * n);
        f << ds_e, ds_i;
        const Vector delta = system.jacobian(t_e, t_i).partialPivLu().solve(-f);
        const Vector c_e = t_e + delta.head(n);
        const Vector c_i = t_i + delta.tail(n);
        if (!delta.allFinite() || c_e.minCoeff() < 0.0 || c_e.maxCoeff() > 1.0 || c_i.minCoeff() < 0.0) break;
        const double trial = residual(c_e, c_i);
        if (!(trial < t_res)) break;
        t_e = c_e;
        t_i = c_i;
        t_res = trial;
        ++local.newton_steps;
      }
      if (t_res < options.tolerance) return done(t_e, t_i, t_res);
      next_newton = res * 1e-2;
      residual(s_e, s_i);
    }
    s_e = (s_e + options.step_ms * ds_e).cwiseMax(0.0).cwiseMin(1.0);
    s_i = (s_i + options.step_ms * ds_i).cwiseMax(0.0);
    res = residual(s_e, s_i);
  }
  throw NoFixedPointError("fixed-point iteration did not converge (max|drift| = " + std::to_string(res) + ")");
}

}  // namespace hico

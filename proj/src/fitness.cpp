#include "hico/fitness.hpp"

#include "hico/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace hico {

std::string_view to_string(Backend backend) {
  return backend == Backend::Simulation ? "simulation" : "moments";
}

Backend parse_backend(std::string_view name) {
  if (name == "moments") return Backend::Moments;
  if (name == "simulation") return Backend::Simulation;
  throw std::invalid_argument("unknown backend '" + std::string(name) + "' (expected moments|simulation)");
}

Matrix covariance_to_correlation(const Matrix& covariance) {
  const auto n = covariance.rows();
  Vector inv_sd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double var = covariance(i, i);
    inv_sd[i] = var >= kVarianceFloor ? 1.0 / std::sqrt(var) : 0.0;
  }
  Matrix corr = inv_sd.asDiagonal() * covariance * inv_sd.asDiagonal();
  corr = corr.cwiseMax(-1.0).cwiseMin(1.0);
  corr = 0.5 * (corr + corr.transpose()).eval();
  corr.diagonal().setOnes();
  return corr;
}

Matrix compute_fc(const Matrix& series) {
  if (series.rows() < 3) throw std::invalid_argument("compute_fc: need at least 3 time samples");
  const Matrix centred = series.rowwise() - series.colwise().mean();
  const Matrix cov = (centred.transpose() * centred) / static_cast<double>(series.rows() - 1);
  return covariance_to_correlation(cov);
}

double fc_fitness(const Matrix& fc_emp, const Matrix& fc_sim, std::string* diagnostic) {
  if (fc_emp.rows() != fc_sim.rows() || fc_emp.cols() != fc_sim.cols() || fc_emp.rows() != fc_emp.cols()) {
    throw std::invalid_argument("fc_fitness: matrices must be square and of equal size");
  }
  const auto n = fc_emp.rows();
  if (n < 3) throw std::invalid_argument("fc_fitness: need N >= 3");
  const auto m = n * (n - 1) / 2;
  Vector x(m), y(m);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j, ++k) {
      x[k] = fc_emp(i, j);
      y[k] = fc_sim(i, j);
    }
  }
  x.array() -= x.mean();
  y.array() -= y.mean();
  const double sxx = x.squaredNorm() / static_cast<double>(m);
  const double syy = y.squaredNorm() / static_cast<double>(m);
  if (!(sxx >= kVarianceFloor) || !(syy >= kVarianceFloor)) {
    if (diagnostic) *diagnostic = "degenerate FC: zero variance in upper triangle";
    return 0.0;
  }
  const double r = x.dot(y) / (static_cast<double>(m) * std::sqrt(sxx * syy));
  return std::clamp(r, -1.0, 1.0);
}

Matrix moments_covariance(const RegionParams& params, const StructuralConnectome& sc) {
  if (sc.has_delays()) throw UnsupportedConfiguration("moments backend requires zero conduction delays");
  const DmfSystem system(params, sc);
  const int n = system.n();
  Vector q(2 * n);
  q.head(n) = system.sigma().square().matrix();
  q.tail(n) = system.sigma().square().matrix();
  const Matrix Q = q.asDiagonal();

  FixedPointStats stats;
  const NeuralState fp = find_fixed_point(params, sc, {}, &stats);
  try {
    return solve_lyapunov(system.jacobian(fp.S_E, fp.S_I), Q);
  } catch (const UnstableSystemError&) {
    const auto strict = FixedPointOptions::conservative();
    if (stats.newton_started_at < strict.newton_threshold) throw;
    // early polishing may have landed on a saddle the flow only passes near
    const NeuralState ref = find_fixed_point(params, sc, strict);
    const double moved = std::max((ref.S_E - fp.S_E).cwiseAbs().maxCoeff(), (ref.S_I - fp.S_I).cwiseAbs().maxCoeff());
    if (moved < 1e-8) throw;
    return solve_lyapunov(system.jacobian(ref.S_E, ref.S_I), Q);
  }
}

Matrix moments_fc(const RegionParams& params, const StructuralConnectome& sc) {
  const Matrix sigma = moments_covariance(params, sc);
  const auto n = sc.n_regions();
  return covariance_to_correlation(sigma.topLeftCorner(n, n));
}

namespace {

FitnessReport failure(Backend backend, std::string detail) {
  return FitnessReport{0.0, backend, false, std::move(detail)};
}

}  // namespace

FitnessReport moments_fitness(const RegionParams& params, const SubjectRecord& subject) {
  if (subject.sc.has_delays()) throw UnsupportedConfiguration("moments backend requires zero conduction delays");
  Matrix fc;
  try {
    fc = moments_fc(params, subject.sc);
  } catch (const NoFixedPointError& e) {
    return failure(Backend::Moments, e.what());
  } catch (const UnstableSystemError& e) {
    return failure(Backend::Moments, e.what());
  }
  if (!fc.allFinite()) return failure(Backend::Moments, "non-finite moments FC");
  std::string diag;
  const double score = fc_fitness(subject.fc_empirical, fc, &diag);
  if (!diag.empty()) return failure(Backend::Moments, diag);
  return FitnessReport{score, Backend::Moments, true, {}};
}

FitnessReport moments_fitness(const Genome& genome, const ParamRanges& ranges, Mode mode,
                              const Parcellation& parcellation, const SubjectRecord& subject) {
  return moments_fitness(decode(genome, ranges, mode, parcellation), subject);
}

Matrix simulated_bold_fc(const RegionParams& params, const StructuralConnectome& sc, const SimConfig& config) {
  SimulationOptions opts;
  opts.duration_ms = config.duration_ms;
  opts.dt_ms = config.dt_ms;
  opts.sample_every_ms = config.sample_every_ms;
  opts.transient_ms = config.transient_ms;
  opts.seed = config.seed;
  const Trajectory traj = simulate(params, sc, opts);
  BalloonState state = BalloonState::steady(traj.S_E.colwise().mean().transpose(), config.hemo);
  const Matrix bold = bold_transform(traj.S_E, traj.sample_every_ms, config.tr_ms, config.hemo, state);
  return compute_fc(bold);
}

FitnessReport simulation_fitness(const RegionParams& params, const SubjectRecord& subject, const SimConfig& config) {
  Matrix fc;
  try {
    fc = simulated_bold_fc(params, subject.sc, config);
  } catch (const InstabilityError& e) {
    return failure(Backend::Simulation, e.what());
  }
  std::string diag;
  const double score = fc_fitness(subject.fc_empirical, fc, &diag);
  // a quiescent but stable network: score 0 by the zero-variance rule
  return FitnessReport{score, Backend::Simulation, true, diag};
}

FitnessReport simulation_fitness(const Genome& genome, const ParamRanges& ranges, Mode mode,
                                 const Parcellation& parcellation, const SubjectRecord& subject,
                                 const SimConfig& config) {
  return simulation_fitness(decode(genome, ranges, mode, parcellation), subject, config);
}

Evaluator make_evaluator(Backend backend, ParamRanges ranges, Parcellation parcellation, SubjectRecord subject,
                         SimConfig sim) {
  struct Bound {
    ParamRanges ranges;
    Parcellation parcellation;
    SubjectRecord subject;
    SimConfig sim;
  };
  auto b = std::make_shared<const Bound>(Bound{ranges, std::move(parcellation), std::move(subject), sim});
  if (backend == Backend::Moments) {
    return [b](const Genome& g) {
      return moments_fitness(g, b->ranges, mode_for_length(g.size()), b->parcellation, b->subject);
    };
  }
  return [b](const Genome& g) {
    return simulation_fitness(g, b->ranges, mode_for_length(g.size()), b->parcellation, b->subject, b->sim);
  };
}

}  // namespace hico

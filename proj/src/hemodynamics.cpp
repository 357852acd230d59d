#include "hico/hemodynamics.hpp"

#include "hico/dmf.hpp"

#include <cmath>
#include <string>

namespace hico {

BalloonState BalloonState::rest(int n) {
  return BalloonState{Vector::Zero(n), Vector::Ones(n), Vector::Ones(n), Vector::Ones(n)};
}

BalloonState BalloonState::steady(const Vector& z, const HemoConstants& c) {
  const auto n = z.size();
  BalloonState st = rest(static_cast<int>(n));
  const double log_one_minus_rho = std::log(1.0 - c.rho);
  const double extraction_at_rest = 1.0 - std::exp(log_one_minus_rho / 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = 1.0 + z[i] / c.gamma_h;
    if (!(f > 0.0)) throw std::invalid_argument("BalloonState::steady: input drives inflow non-positive");
    const double v = std::pow(f, c.alpha);
    st.f[i] = f;
    st.v[i] = v;
    st.q[i] = v * (1.0 - std::exp(log_one_minus_rho / f)) / extraction_at_rest;
  }
  return st;
}

Matrix bold_transform(const Matrix& neural, double dt_n_ms, double tr_ms, const HemoConstants& constants) {
  auto state = BalloonState::rest(static_cast<int>(neural.cols()));
  return bold_transform(neural, dt_n_ms, tr_ms, constants, state);
}

Matrix bold_transform(const Matrix& neural, double dt_n_ms, double tr_ms, const HemoConstants& c,
                      BalloonState& state) {
  if (neural.rows() == 0 || neural.cols() == 0) throw std::invalid_argument("bold_transform: empty series");
  if (!(dt_n_ms > 0.0) || !(tr_ms >= dt_n_ms)) throw std::invalid_argument("bold_transform: need tr_ms >= dt_n_ms > 0");
  const auto n = neural.cols();
  const auto steps = neural.rows();
  if (state.s.size() != n) state = BalloonState::rest(static_cast<int>(n));

  const double dt = dt_n_ms * 1e-3;
  const double inv_alpha = 1.0 / c.alpha;
  const double inv_tau = 1.0 / c.tau_h;
  const double log_one_minus_rho = std::log(1.0 - c.rho);
  // E(1) evaluated exactly as E(f) is, so f = 1 gives f*E(f)/E(1) == 1 bit-for-bit
  const double extraction_at_rest = 1.0 - std::exp(log_one_minus_rho / 1.0);
  const double eps = 1e-9;
  const auto n_out = static_cast<Eigen::Index>(std::floor(static_cast<double>(steps) * dt_n_ms / tr_ms + eps));

  Matrix bold(n_out, n);
  Eigen::Index emitted = 0;
  for (Eigen::Index k = 0; k < steps; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = state.s[i], f = state.f[i], v = state.v[i], q = state.q[i];
      const double outflow = std::pow(v, inv_alpha);
      const double extraction = 1.0 - std::exp(log_one_minus_rho / f);
      const double ds = neural(k, i) - c.kappa * s - c.gamma_h * (f - 1.0);
      const double df = s;
      const double dv = (f - outflow) * inv_tau;
      const double dq = (f * extraction / extraction_at_rest - outflow * q / v) * inv_tau;
      state.s[i] = s + dt * ds;
      state.f[i] = f + dt * df;
      state.v[i] = v + dt * dv;
      state.q[i] = q + dt * dq;
    }
    if (!state.f.allFinite() || !state.v.allFinite() || !state.q.allFinite() || !state.s.allFinite() ||
        state.f.minCoeff() <= 0.0 || state.v.minCoeff() <= 0.0 || state.q.minCoeff() <= 0.0) {
      throw InstabilityError("hemodynamic state left the admissible region at step " + std::to_string(k), k);
    }
    if (emitted < n_out && static_cast<double>(k + 1) * dt_n_ms + eps >= static_cast<double>(emitted + 1) * tr_ms) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = state.v[i], q = state.q[i];
        bold(emitted, i) = c.V0 * (c.k1 * (1.0 - q) + c.k2 * (1.0 - q / v) + c.k3 * (1.0 - v));
      }
      ++emitted;
    }
  }
  return bold;
}

}  // namespace hico

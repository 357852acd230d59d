#pragma once

#include "hico/connectome.hpp"

namespace hico {

/// Balloon-Windkessel constants (Friston et al. 2003 values).
struct HemoConstants {
  double kappa = 0.65;    // 1/s, signal decay
  double gamma_h = 0.41;  // 1/s, flow-dependent elimination
  double tau_h = 0.98;    // s, transit time
  double alpha = 0.32;    // Grubb's exponent
  double rho = 0.34;      // resting oxygen extraction
  double V0 = 0.02;       // resting blood volume fraction
  double k1 = 7.0 * 0.34;
  double k2 = 2.0;
  double k3 = 2.0 * 0.34 - 0.2;
};

struct BalloonState {
  Vector s, f, v, q;

  static BalloonState rest(int n);
  /// Equilibrium under constant input z per region (rest when z = 0).
  static BalloonState steady(const Vector& z, const HemoConstants& constants);
};

/// Drives one Balloon-Windkessel unit per region with z = S_E, Euler steps of
/// dt_n_ms, and returns one BOLD sample per tr_ms (samples x regions).
/// Output length is floor(samples * dt_n / tr). Throws InstabilityError on a
/// non-finite hemodynamic state.
Matrix bold_transform(const Matrix& neural, double dt_n_ms, double tr_ms, const HemoConstants& constants = {});

/// Same, starting from and updating `state` in place.
Matrix bold_transform(const Matrix& neural, double dt_n_ms, double tr_ms, const HemoConstants& constants,
                      BalloonState& state);

}  // namespace hico

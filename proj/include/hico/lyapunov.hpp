#pragma once

#include "hico/connectome.hpp"

#include <stdexcept>

namespace hico {

inline constexpr double kStabilityMargin = -1e-9;

/// A has an eigenvalue with real part >= the stability margin.
class UnstableSystemError : public std::runtime_error {
 public:
  UnstableSystemError(const std::string& what, double max_real_part)
      : std::runtime_error(what), max_real_part_(max_real_part) {}
  [[nodiscard]] double max_real_part() const { return max_real_part_; }

 private:
  double max_real_part_;
};

/// Solves A S + S A^T + Q = 0 for symmetric S (Bartels-Stewart: real Schur
/// form of A, then block back-substitution on the quasi-triangular factor).
/// The Schur diagonal doubles as the stability check.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q, double margin = kStabilityMargin);

/// Reference solver: (I (x) A + A (x) I) vec(S) = -vec(Q), dense LU.
/// O(n^6); refuses n > 64.
Matrix solve_lyapunov_kronecker(const Matrix& A, const Matrix& Q, double margin = kStabilityMargin);

/// Largest real part over the spectrum of A (dense eigensolver).
double spectral_abscissa(const Matrix& A);

/// ||A S + S A^T + Q||_F
double lyapunov_residual(const Matrix& A, const Matrix& S, const Matrix& Q);

}  // namespace hico

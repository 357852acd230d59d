#include "hico/lyapunov.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

namespace hico {

namespace {

struct Block {
  Eigen::Index start;
  Eigen::Index size;
};

using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

std::vector<Block> diagonal_blocks(const Matrix& T) {
  std::vector<Block> blocks;
  const auto n = T.rows();
  for (Eigen::Index i = 0; i < n;) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      blocks.push_back({i, 2});
      i += 2;
    } else {
      blocks.push_back({i, 1});
      i += 1;
    }
  }
  return blocks;
}

double max_real_part(const Matrix& T, const Block& b) {
  if (b.size == 1) return T(b.start, b.start);
  const double a = T(b.start, b.start), bb = T(b.start, b.start + 1);
  const double c = T(b.start + 1, b.start), d = T(b.start + 1, b.start + 1);
  const double half_trace = 0.5 * (a + d);
  const double disc = 0.25 * (a - d) * (a - d) + bb * c;
  return disc >= 0.0 ? half_trace + std::sqrt(disc) : half_trace;
}

void check_square(const Matrix& A, const Matrix& Q) {
  if (A.rows() != A.cols() || Q.rows() != A.rows() || Q.cols() != A.cols() || A.rows() == 0) {
    throw std::invalid_argument("lyapunov: A and Q must be square and of equal size");
  }
}

[[noreturn]] void throw_unstable(double abscissa) {
  throw UnstableSystemError("unstable system: max Re(lambda) = " + std::to_string(abscissa), abscissa);
}

}  // namespace

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q, double margin) {
  check_square(A, Q);
  if (!A.allFinite() || !Q.allFinite()) throw std::invalid_argument("lyapunov: non-finite input");
  const Eigen::RealSchur<Matrix> schur(A);
  if (schur.info() != Eigen::Success) throw UnstableSystemError("real Schur decomposition failed", NAN);
  const Matrix& T = schur.matrixT();
  const Matrix& U = schur.matrixU();
  const auto blocks = diagonal_blocks(T);

  double abscissa = -INFINITY;
  for (const auto& b : blocks) abscissa = std::max(abscissa, max_real_part(T, b));
  if (abscissa >= margin) throw_unstable(abscissa);

  // T Y + Y T^T = F with F = -U^T Q U, solved block column by block column
  // from the right; T^T is block lower triangular so later columns are known.
  // Y is symmetric, so only blocks on or above the diagonal are solved and the
  // rest is mirrored from columns already finished.
  const auto n = A.rows();
  const Matrix F = -(U.transpose() * Q * U);
  Matrix Y = Matrix::Zero(n, n);
  for (auto jb = blocks.rbegin(); jb != blocks.rend(); ++jb) {
    const auto j0 = jb->start, q = jb->size;
    const auto tail_j = n - (j0 + q);
    if (tail_j > 0) Y.block(j0 + q, j0, tail_j, q) = Y.block(j0, j0 + q, q, tail_j).transpose();
    Matrix G = F.topRows(j0 + q).middleCols(j0, q);
    if (tail_j > 0) {
      G.noalias() -= Y.topRightCorner(j0 + q, tail_j) * T.block(j0, j0 + q, q, tail_j).transpose();
      G.noalias() -= T.topRightCorner(j0 + q, tail_j) * Y.block(j0 + q, j0, tail_j, q);
    }
    const Small Tjj = T.block(j0, j0, q, q);
    // column-oriented back substitution: once block row i is solved its
    // contribution is removed from all rows above it, so G.middleRows(i0, p)
    // is final when block i is reached
    for (auto ib = jb; ib != blocks.rend(); ++ib) {
      const auto i0 = ib->start, p = ib->size;
      if (p == 1 && q == 1) {
        const double y = G(i0, 0) / (T(i0, i0) + Tjj(0, 0));
        Y(i0, j0) = y;
        if (i0 > 0) G.col(0).head(i0).noalias() -= y * T.col(i0).head(i0);
        continue;
      }
      const Small R = G.block(i0, 0, p, q);
      const Small Tii = T.block(i0, i0, p, p);
      // vec(Tii Y + Y Tjj^T) = (I_q (x) Tii + Tjj (x) I_p) vec(Y)
      Small M = Small::Zero(p * q, p * q);
      for (Eigen::Index c = 0; c < q; ++c) M.block(c * p, c * p, p, p) += Tii;
      for (Eigen::Index r = 0; r < q; ++r)
        for (Eigen::Index c = 0; c < q; ++c) M.block(r * p, c * p, p, p).diagonal().array() += Tjj(r, c);
      Small rhs(p * q, 1);
      for (Eigen::Index c = 0; c < q; ++c) rhs.block(c * p, 0, p, 1) = R.col(c);
      const Small sol = M.fullPivLu().solve(rhs);
      Small Yij(p, q);
      for (Eigen::Index c = 0; c < q; ++c) Yij.col(c) = sol.block(c * p, 0, p, 1);
      Y.block(i0, j0, p, q) = Yij;
      if (i0 > 0) G.topRows(i0).noalias() -= T.block(0, i0, i0, p) * Yij;
    }
  }
  Matrix S = U * Y * U.transpose();
  return 0.5 * (S + S.transpose());
}

Matrix solve_lyapunov_kronecker(const Matrix& A, const Matrix& Q, double margin) {
  check_square(A, Q);
  const auto n = A.rows();
  if (n > 64) throw std::invalid_argument("kronecker lyapunov solver limited to n <= 64");
  const double abscissa = spectral_abscissa(A);
  if (abscissa >= margin) throw_unstable(abscissa);
  const Matrix I = Matrix::Identity(n, n);
  Matrix K = Matrix::Zero(n * n, n * n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      K.block(r * n, c * n, n, n) += I(r, c) * A;
      K.block(r * n, c * n, n, n) += A(r, c) * I;
    }
  }
  const Vector rhs = -Eigen::Map<const Vector>(Q.data(), n * n);
  const Vector x = K.partialPivLu().solve(rhs);
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

double spectral_abscissa(const Matrix& A) {
  const Eigen::EigenSolver<Matrix> es(A, false);
  return es.eigenvalues().real().maxCoeff();
}

double lyapunov_residual(const Matrix& A, const Matrix& S, const Matrix& Q) {
  return (A * S + S * A.transpose() + Q).norm();
}

}  // namespace hico

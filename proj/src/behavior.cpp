#include "hico/behavior.hpp"

#include "hico/genome.hpp"
#include "hico/rng.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hico {

Standardizer Standardizer::fit(const Matrix& X) {
  Standardizer s;
  const auto n = static_cast<double>(X.rows());
  s.mean = X.colwise().mean().transpose();
  s.sd = ((X.rowwise() - s.mean.transpose()).array().square().colwise().sum() / n).sqrt().transpose();
  return s;
}

Matrix Standardizer::apply(const Matrix& X) const {
  Matrix out = X.rowwise() - mean.transpose();
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    if (sd[c] < 1e-12) {
      out.col(c).setZero();
    } else {
      out.col(c) /= sd[c];
    }
  }
  return out;
}

Vector RidgeModel::predict(const Matrix& X) const {
  return (X * weights).array() + intercept;
}

RidgeModel ridge_fit(const Matrix& X, const Vector& y, double lambda) {
  if (X.rows() != y.size()) throw std::invalid_argument("ridge_fit: X and y row counts differ");
  if (X.rows() < 2) throw std::invalid_argument("ridge_fit: need at least 2 samples");
  if (!(lambda >= 0.0)) throw std::invalid_argument("ridge_fit: lambda must be >= 0");
  RidgeModel m;
  m.intercept = y.mean();
  const Vector yc = y.array() - m.intercept;
  Matrix gram = X.transpose() * X;
  gram.diagonal().array() += lambda;
  const Eigen::LDLT<Matrix> ldlt(gram);
  const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-12 * scale) {
    throw std::invalid_argument("ridge_fit: singular system; use lambda > 0");
  }
  m.weights = ldlt.solve(X.transpose() * yc);
  return m;
}

double r_squared(const Vector& y, const Vector& yhat) {
  if (y.size() != yhat.size()) throw std::invalid_argument("r_squared: length mismatch");
  if (y.size() < 2) throw std::invalid_argument("r_squared: need at least 2 samples");
  const double sst = (y.array() - y.mean()).square().sum();
  if (!(sst > 0.0)) throw std::invalid_argument("r_squared: target has zero variance");
  return 1.0 - (y - yhat).squaredNorm() / sst;
}

double in_sample_r2(const Matrix& X, const Vector& y, double lambda) {
  const Standardizer st = Standardizer::fit(X);
  const Matrix Xs = st.apply(X);
  return r_squared(y, ridge_fit(Xs, y, lambda).predict(Xs));
}

namespace {

std::vector<int> shuffled_indices(int n, RngStream rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.next_int(static_cast<std::uint64_t>(i) + 1)]);
  return idx;
}

/// fold[i] for row i.
std::vector<int> fold_assignment(int n, int k, std::uint64_t seed) {
  const auto order = shuffled_indices(n, RngStream(seed).derive("folds"));
  std::vector<int> fold(n);
  for (int pos = 0; pos < n; ++pos) fold[order[pos]] = pos % k;
  return fold;
}

double cv_r2_with_folds(const Matrix& X, const Vector& y, double lambda, int k, const std::vector<int>& fold) {
  const auto n = static_cast<int>(X.rows());
  Vector pred(n);
  for (int f = 0; f < k; ++f) {
    std::vector<int> train, test;
    for (int i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);
    if (test.empty()) throw std::invalid_argument("cv_r2: empty fold");
    const Matrix Xtr = X(train, Eigen::all);
    const Vector ytr = y(train);
    const Standardizer st = Standardizer::fit(Xtr);
    const RidgeModel m = ridge_fit(st.apply(Xtr), ytr, lambda);
    const Vector p = m.predict(st.apply(X(test, Eigen::all)));
    for (std::size_t t = 0; t < test.size(); ++t) pred[test[t]] = p[static_cast<Eigen::Index>(t)];
  }
  return r_squared(y, pred);
}

void check_cv(const Matrix& X, const Vector& y, int k) {
  if (X.rows() != y.size()) throw std::invalid_argument("cv_r2: X and y row counts differ");
  if (k < 2) throw std::invalid_argument("cv_r2: need k_folds >= 2");
  if (X.rows() < k) throw std::invalid_argument("cv_r2: fewer samples than folds");
}

}  // namespace

double cv_r2(const Matrix& X, const Vector& y, double lambda, int k_folds, std::uint64_t seed) {
  check_cv(X, y, k_folds);
  return cv_r2_with_folds(X, y, lambda, k_folds, fold_assignment(static_cast<int>(X.rows()), k_folds, seed));
}

PermutationResult permutation_test(const Matrix& X, const Vector& y, double lambda, int n_perm, std::uint64_t seed,
                                   const PermutationOptions& options) {
  if (n_perm < 1) throw std::invalid_argument("permutation_test: n_perm must be >= 1");
  const auto n = static_cast<int>(X.rows());
  std::vector<int> fold;
  if (!options.in_sample) {
    check_cv(X, y, options.k_folds);
    fold = fold_assignment(n, options.k_folds, seed);
  }
  auto score = [&](const Vector& target) {
    return options.in_sample ? in_sample_r2(X, target, lambda) : cv_r2_with_folds(X, target, lambda, options.k_folds, fold);
  };

  PermutationResult result;
  result.r2_true = score(y);
  result.null_samples.assign(n_perm, 0.0);
  const RngStream perm_root = RngStream(seed).derive("permutation");
  auto replicate = [&](int b) {
    const auto order = shuffled_indices(n, perm_root.derive(static_cast<std::uint64_t>(b)));
    Vector yp(n);
    for (int i = 0; i < n; ++i) yp[i] = y[order[i]];
    result.null_samples[b] = score(yp);
  };
  if (options.parallel) {
    const int workers = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(workers)
    for (int b = 0; b < n_perm; ++b) replicate(b);
  } else {
    for (int b = 0; b < n_perm; ++b) replicate(b);
  }
  const auto exceed = std::count_if(result.null_samples.begin(), result.null_samples.end(),
                                    [&](double v) { return v >= result.r2_true; });
  result.p_value = (1.0 + static_cast<double>(exceed)) / (1.0 + n_perm);
  return result;
}

std::vector<double> bh_fdr(const std::vector<double>& p_values) {
  const auto m = p_values.size();
  for (const double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bh_fdr: p-values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> q(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const double candidate = p_values[order[r]] * static_cast<double>(m) / static_cast<double>(r + 1);
    running = std::min(running, candidate);
    q[order[r]] = running;
  }
  return q;
}

Matrix extract_features(const std::vector<std::vector<double>>& fitted, FeatureMode mode,
                        std::optional<RsnLabel> label) {
  if (mode == FeatureMode::PerRsn && !label) throw std::invalid_argument("per-RSN features need a label");
  Matrix X(static_cast<Eigen::Index>(fitted.size()), kBlockSize);
  for (std::size_t s = 0; s < fitted.size(); ++s) {
    const auto& v = fitted[s];
    if (v.size() != static_cast<std::size_t>(kHomogeneousLength) &&
        v.size() != static_cast<std::size_t>(kHeterogeneousLength)) {
      throw std::invalid_argument("extract_features: vectors must have 20 or 140 values");
    }
    const bool homogeneous = v.size() == static_cast<std::size_t>(kHomogeneousLength);
    for (int c = 0; c < kBlockSize; ++c) {
      double value = 0.0;
      if (homogeneous) {
        value = v[c];
      } else if (mode == FeatureMode::PerRsn) {
        value = v[index_of(*label) * kBlockSize + c];
      } else {
        for (int r = 0; r < kNumRsn; ++r) value += v[r * kBlockSize + c];
        value /= kNumRsn;
      }
      X(static_cast<Eigen::Index>(s), c) = value;
    }
  }
  return X;
}

}  // namespace hico

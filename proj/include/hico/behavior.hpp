#pragma once

#include "hico/connectome.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hico {

/// Column standardisation; constant columns (sd < 1e-12) map to 0.
struct Standardizer {
  Vector mean;
  Vector sd;

  static Standardizer fit(const Matrix& X);
  [[nodiscard]] Matrix apply(const Matrix& X) const;
};

struct RidgeModel {
  Vector weights;
  double intercept = 0.0;

  [[nodiscard]] Vector predict(const Matrix& X) const;
};

/// weights = (X^T X + lambda I)^-1 X^T (y - mean(y)), intercept = mean(y).
/// X is expected to be standardised already.
RidgeModel ridge_fit(const Matrix& X, const Vector& y, double lambda);

/// 1 - SSR / SST; throws on zero-variance y.
double r_squared(const Vector& y, const Vector& yhat);

/// Standardise on all rows, fit, predict the same rows.
double in_sample_r2(const Matrix& X, const Vector& y, double lambda);

/// Rows are shuffled by `seed`; row at shuffled position i falls in fold
/// i mod k. Standardisation is fit on training folds only; R^2 is computed on
/// the pooled out-of-fold predictions.
double cv_r2(const Matrix& X, const Vector& y, double lambda, int k_folds, std::uint64_t seed);

struct PermutationResult {
  double r2_true = 0.0;
  double p_value = 1.0;
  std::vector<double> null_samples;
};

struct PermutationOptions {
  int k_folds = 5;
  bool in_sample = false;
  bool parallel = true;
  int threads = 0;
};

/// p = (1 + #{null >= true}) / (1 + n_perm). Fold assignment is shared by all
/// replicates; replicate b permutes y with a stream derived from (seed, b).
PermutationResult permutation_test(const Matrix& X, const Vector& y, double lambda, int n_perm, std::uint64_t seed,
                                   const PermutationOptions& options = {});

/// Benjamini-Hochberg step-up q-values, in input order.
std::vector<double> bh_fdr(const std::vector<double>& p_values);

enum class FeatureMode { PerRsn, RsnAverage };

/// Subjects x 20 features from fitted physical vectors (20 or 140 values).
/// PerRsn takes the block of `label` (a 20-vector is its own block for every
/// label); RsnAverage averages the seven blocks.
Matrix extract_features(const std::vector<std::vector<double>>& fitted, FeatureMode mode,
                        std::optional<RsnLabel> label = std::nullopt);

}  // namespace hico

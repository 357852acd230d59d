#pragma once

#include "hico/connectome.hpp"
#include "hico/fitness.hpp"

#include <map>
#include <string>
#include <vector>

namespace hico {

/// Per coordinate: sort, drop floor(p * n) values from each tail, average the
/// rest. Requires 0 <= p < 0.5 and equal-length inputs.
std::vector<double> trimmed_mean(const std::vector<std::vector<double>>& vectors, double p);

struct LooResult {
  std::string subject_id;
  std::vector<double> aggregate;  // physical parameters
  double loo_score = 0.0;
  bool stable = false;
  std::string detail;
};

struct LooOptions {
  double trim = 0.1;
  Backend backend = Backend::Moments;
  SimConfig sim{};
  bool parallel = true;
  int threads = 0;
};

/// Scores the trimmed mean of every other subject's fitted physical vector on
/// each held-out subject. Instability scores 0; never throws for it. Results
/// follow cohort order.
std::vector<LooResult> loo_evaluate(const Cohort& cohort, const std::map<std::string, std::vector<double>>& fitted,
                                    const LooOptions& options = {});

}  // namespace hico

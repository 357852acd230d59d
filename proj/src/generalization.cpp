#include "hico/generalization.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hico {

std::vector<double> trimmed_mean(const std::vector<std::vector<double>>& vectors, double p) {
  if (vectors.empty()) throw std::invalid_argument("trimmed_mean: no input vectors");
  if (!(p >= 0.0 && p < 0.5)) throw std::invalid_argument("trimmed_mean: need 0 <= p < 0.5");
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) throw std::invalid_argument("trimmed_mean: vectors differ in length");
  }
  const std::size_t n = vectors.size();
  // the epsilon keeps products like 0.1 * 10 from flooring to 0
  const auto cut = static_cast<std::size_t>(std::floor(p * static_cast<double>(n) + 1e-9));
  std::vector<double> out(dim);
  std::vector<double> column(n);
  for (std::size_t d = 0; d < dim; ++d) {
    for (std::size_t i = 0; i < n; ++i) column[i] = vectors[i][d];
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (std::size_t i = cut; i < n - cut; ++i) sum += column[i];
    out[d] = sum / static_cast<double>(n - 2 * cut);
  }
  return out;
}

std::vector<LooResult> loo_evaluate(const Cohort& cohort, const std::map<std::string, std::vector<double>>& fitted,
                                    const LooOptions& options) {
  const auto& subjects = cohort.subjects;
  const int n = static_cast<int>(subjects.size());
  if (n < 3) throw std::invalid_argument("loo_evaluate: needs at least 3 subjects, got " + std::to_string(n));
  std::vector<const std::vector<double>*> vectors;
  for (const auto& s : subjects) {
    const auto it = fitted.find(s.id);
    if (it == fitted.end()) throw std::invalid_argument("loo_evaluate: no fitted parameters for subject " + s.id);
    vectors.push_back(&it->second);
  }
  const std::size_t dim = vectors.front()->size();
  for (const auto* v : vectors) {
    if (v->size() != dim) throw std::invalid_argument("loo_evaluate: fitted vectors mix modes");
  }

  std::vector<LooResult> results(n);
  auto run = [&](int j) {
    std::vector<std::vector<double>> others;
    for (int i = 0; i < n; ++i) {
      if (i != j) others.push_back(*vectors[i]);
    }
    LooResult r;
    r.subject_id = subjects[j].id;
    r.aggregate = trimmed_mean(others, options.trim);
    const RegionParams params = assign_regions(r.aggregate, cohort.parcellation);
    const FitnessReport report = options.backend == Backend::Moments
                                     ? moments_fitness(params, subjects[j])
                                     : simulation_fitness(params, subjects[j], options.sim);
    r.loo_score = report.stable ? report.score : 0.0;
    r.stable = report.stable;
    r.detail = report.detail;
    results[j] = std::move(r);
  };

  if (!options.parallel) {
    for (int j = 0; j < n; ++j) run(j);
    return results;
  }
  const int workers = options.threads > 0 ? options.threads : omp_get_max_threads();
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int j = 0; j < n; ++j) {
    try {
      run(j);
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  return results;
}

}  // namespace hico

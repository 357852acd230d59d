#include "hico/evolution.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace hico {

void GaConfig::validate() const {
  if (pop_size < 2) throw std::invalid_argument("pop_size must be >= 2");
  if (elite_count <= 0 || elite_count >= pop_size) throw std::invalid_argument("need 0 < elite_count < pop_size");
  if (tournament_k < 1) throw std::invalid_argument("tournament_k must be >= 1");
  if (!(p_mut >= 0.0 && p_mut <= 1.0)) throw std::invalid_argument("p_mut must lie in [0, 1]");
  if (total_generations < 1) throw std::invalid_argument("total_generations must be >= 1");
}

int tournament_index(const std::vector<Individual>& population, int k, RngStream& rng) {
  if (population.empty()) throw std::invalid_argument("tournament on an empty population");
  int best = -1;
  for (int draw = 0; draw < k; ++draw) {
    const int idx = static_cast<int>(rng.next_int(population.size()));
    if (best < 0 || population[idx].score > population[best].score ||
        (population[idx].score == population[best].score && idx < best)) {
      best = idx;
    }
  }
  return best;
}

Genome tournament_select(const std::vector<Individual>& population, int k, RngStream& rng) {
  return population[tournament_index(population, k, rng)].genome;
}

Genome uniform_crossover(const Genome& a, const Genome& b, RngStream& rng) {
  if (a.size() != b.size()) throw std::invalid_argument("uniform_crossover: parent lengths differ");
  Genome child = a;
  for (int i = 0; i < a.size(); ++i) {
    if (rng.next_u64() >> 63) child.genes[i] = b.genes[i];
  }
  return child;
}

Genome mutate(const Genome& g, double p_mut, const std::vector<bool>& mask, RngStream& rng) {
  if (static_cast<int>(mask.size()) != g.size()) throw std::invalid_argument("mutate: mask length differs");
  Genome out = g;
  for (int i = 0; i < g.size(); ++i) {
    if (!mask[i]) continue;
    if (rng.next_uniform() < p_mut) out.genes[i] = static_cast<int>(rng.next_int(kGeneLevels));
  }
  return out;
}

void sort_population(std::vector<Individual>& population) {
  std::sort(population.begin(), population.end(), [](const Individual& a, const Individual& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.genome < b.genome;
  });
}

namespace {

double safe_score(const Evaluator& evaluator, const Genome& genome) {
  try {
    const double s = evaluator(genome).score;
    return std::isfinite(s) ? s : 0.0;
  } catch (...) {
    return 0.0;
  }
}

}  // namespace

std::vector<double> evaluate_population(const std::vector<Genome>& genomes, const Evaluator& evaluator,
                                        bool parallel, int threads) {
  const auto n = static_cast<int>(genomes.size());
  std::vector<double> scores(n, 0.0);
  if (!parallel) {
    for (int i = 0; i < n; ++i) scores[i] = safe_score(evaluator, genomes[i]);
    return scores;
  }
  const int workers = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int i = 0; i < n; ++i) scores[i] = safe_score(evaluator, genomes[i]);
  return scores;
}

namespace {

class ScoreCache {
 public:
  ScoreCache(const Evaluator& evaluator, bool parallel, int threads)
      : evaluator_(evaluator), parallel_(parallel), threads_(threads) {}

  /// Scores every genome, evaluating each distinct unseen genome once.
  std::vector<double> score(const std::vector<Genome>& genomes) {
    std::vector<Genome> todo;
    for (const auto& g : genomes) {
      if (!memo_.contains(g) && std::find(todo.begin(), todo.end(), g) == todo.end()) todo.push_back(g);
    }
    const auto fresh = evaluate_population(todo, evaluator_, parallel_, threads_);
    for (std::size_t i = 0; i < todo.size(); ++i) memo_.emplace(todo[i], fresh[i]);
    evaluations_ += static_cast<long>(todo.size());
    std::vector<double> out;
    out.reserve(genomes.size());
    for (const auto& g : genomes) out.push_back(memo_.at(g));
    return out;
  }

  [[nodiscard]] long evaluations() const { return evaluations_; }

 private:
  const Evaluator& evaluator_;
  bool parallel_;
  int threads_;
  std::map<Genome, double> memo_;
  long evaluations_ = 0;
};

Genome random_genome(int length, RngStream rng) {
  Genome g;
  g.genes.resize(length);
  for (auto& gene : g.genes) gene = static_cast<int>(rng.next_int(kGeneLevels));
  return g;
}

void freeze_inactive(std::vector<Genome>& genomes, const Genome& reference, const std::vector<bool>& mask) {
  for (auto& g : genomes) {
    for (int i = 0; i < g.size(); ++i) {
      if (!mask[i]) g.genes[i] = reference.genes[i];
    }
  }
}

}  // namespace

EvolveResult evolve(const GaConfig& config, const Schedule& schedule, const Evaluator& evaluator,
                    const EvolveOptions& options) {
  config.validate();
  schedule.validate();
  if (schedule.total_generations() != config.total_generations) {
    throw std::invalid_argument("schedule budget (" + std::to_string(schedule.total_generations()) +
                                ") differs from total_generations (" + std::to_string(config.total_generations) + ")");
  }
  const RngStream root(config.seed);
  const RngStream gen_root = root.derive("generation");
  const int pop = config.pop_size;
  const int elites = config.elite_count;

  std::vector<Genome> genomes;
  const int length0 = genome_length(schedule.phases[0].mode);
  if (options.initial_population) {
    genomes = *options.initial_population;
    if (static_cast<int>(genomes.size()) != pop) throw std::invalid_argument("initial population size != pop_size");
    for (const auto& g : genomes) {
      if (g.size() != length0) throw std::invalid_argument("initial genome length does not match the first phase");
      for (const int gene : g.genes) {
        if (gene < 0 || gene >= kGeneLevels) throw std::invalid_argument("initial gene out of range");
      }
    }
  } else {
    const RngStream init = root.derive("init");
    for (int s = 0; s < pop; ++s) genomes.push_back(random_genome(length0, init.derive(static_cast<std::uint64_t>(s))));
  }

  ScoreCache cache(evaluator, options.parallel, options.threads);
  EvolveResult result;
  std::vector<Individual> population;
  for (int gen = 0; gen < config.total_generations; ++gen) {
    const int phase_index = schedule.phase_at(gen);
    const auto scores = cache.score(genomes);
    population.clear();
    for (int s = 0; s < pop; ++s) population.push_back(Individual{genomes[s], scores[s]});
    sort_population(population);

    double mean = 0.0;
    for (const auto& ind : population) mean += ind.score;
    mean /= pop;
    result.records.push_back(GenerationRecord{gen, population[0].score, mean, phase_index, population[0].genome});
    if (options.observer) options.observer(gen, phase_index, population);
    if (gen + 1 == config.total_generations) break;

    const int next_phase_index = schedule.phase_at(gen + 1);
    const Phase& next_phase = schedule.phases[next_phase_index];
    const RngStream gen_rng = gen_root.derive(static_cast<std::uint64_t>(gen + 1));
    auto slot_rng = [&](int s) { return gen_rng.derive(static_cast<std::uint64_t>(s)); };
    const Genome& best = population[0].genome;

    genomes.clear();
    if (next_phase_index == phase_index) {
      for (int s = 0; s < elites; ++s) genomes.push_back(population[s].genome);
      for (int s = elites; s < pop; ++s) {
        RngStream rng = slot_rng(s);
        const Genome& a = population[tournament_index(population, config.tournament_k, rng)].genome;
        const Genome& b = population[tournament_index(population, config.tournament_k, rng)].genome;
        genomes.push_back(mutate(uniform_crossover(a, b, rng), config.p_mut, next_phase.active_mask, rng));
      }
      continue;
    }

    const int next_length = genome_length(next_phase.mode);
    Genome anchor;
    if (next_phase.on_enter == OnEnter::BroadcastGlobalBlock) {
      if (best.size() != kHomogeneousLength) throw std::logic_error("broadcast entry needs a 20-gene population");
      const std::vector<bool> all(kHomogeneousLength, true);
      for (int s = 0; s < elites; ++s) genomes.push_back(broadcast_global_block(population[s].genome));
      for (int s = elites; s < pop; ++s) {
        RngStream rng = slot_rng(s);
        genomes.push_back(broadcast_global_block(mutate(population[(s - elites) % elites].genome, config.p_mut, all, rng)));
      }
      anchor = broadcast_global_block(best);
    } else {
      if (best.size() != next_length) throw std::logic_error("phase changes genome length without a broadcast entry");
      genomes.push_back(best);
      for (int s = 1; s < pop; ++s) {
        RngStream rng = slot_rng(s);
        genomes.push_back(mutate(best, config.p_mut, next_phase.active_mask, rng));
      }
      anchor = best;
    }
    freeze_inactive(genomes, anchor, next_phase.active_mask);
  }

  result.best = population[0].genome;
  result.best_score = population[0].score;
  result.evaluations = cache.evaluations();
  return result;
}

}  // namespace hico

#pragma once

#include "hico/curriculum.hpp"
#include "hico/fitness.hpp"
#include "hico/genome.hpp"
#include "hico/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace hico {

struct GaConfig {
  int pop_size = 100;
  int elite_count = 20;
  int tournament_k = 3;
  double p_mut = 0.1;
  int total_generations = 120;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Individual {
  Genome genome;
  double score = 0.0;
};

struct GenerationRecord {
  int generation = 0;
  double best_score = 0.0;
  double mean_score = 0.0;
  int phase_index = 0;
  Genome best_genome;
};

/// Lowest population index among the maxima of k uniform draws (with
/// replacement).
int tournament_index(const std::vector<Individual>& population, int k, RngStream& rng);
Genome tournament_select(const std::vector<Individual>& population, int k, RngStream& rng);

Genome uniform_crossover(const Genome& a, const Genome& b, RngStream& rng);

/// Resamples each masked gene uniformly from {0..999} with probability p_mut.
Genome mutate(const Genome& g, double p_mut, const std::vector<bool>& mask, RngStream& rng);

/// Score-descending order; equal scores ordered by genome.
void sort_population(std::vector<Individual>& population);

/// Scores for `genomes`; evaluator exceptions and non-finite scores map to 0.
/// Results are indexed like the input whatever the worker count.
std::vector<double> evaluate_population(const std::vector<Genome>& genomes, const Evaluator& evaluator,
                                        bool parallel, int threads = 0);

struct EvolveOptions {
  bool parallel = true;
  int threads = 0;  // 0: OpenMP default
  std::optional<std::vector<Genome>> initial_population;
  /// Called once per generation with the evaluated, sorted population.
  std::function<void(int generation, int phase_index, const std::vector<Individual>&)> observer;
};

struct EvolveResult {
  Genome best;
  double best_score = 0.0;
  std::vector<GenerationRecord> records;
  long evaluations = 0;  // distinct genomes scored
};

/// Elitist GA over the schedule's phases.
///
/// Entering a BroadcastGlobalBlock phase: each elite is broadcast to 140
/// genes and the other slots hold broadcasts of mutated elites. Entering any
/// other phase: slot 0 is the best genome, the rest are copies of it mutated
/// on the new phase's mask. In both cases genes outside the new mask are then
/// set to the best genome's values, so inactive genes agree across the whole
/// population for the rest of the phase.
EvolveResult evolve(const GaConfig& config, const Schedule& schedule, const Evaluator& evaluator,
                    const EvolveOptions& options = {});

}  // namespace hico

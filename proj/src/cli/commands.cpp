#include "cli/commands.hpp"

#include "cli/io.hpp"
#include "hico/behavior.hpp"
#include "hico/curriculum.hpp"
#include "hico/dmf.hpp"
#include "hico/evolution.hpp"
#include "hico/fitness.hpp"
#include "hico/generalization.hpp"
#include "hico/rng.hpp"
#include "hico/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace hico::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

/// Runtime failure already reported per item; only the exit code remains.
struct PartialFailure {};

json meta_base(const std::string& command) {
  return json{{"tool", "hico"}, {"version", kToolVersion}, {"rng_version", RngStream::kRngVersion}, {"command", command}};
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

void save_matrix_atomic(const fs::path& path, const Matrix& m) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  save_matrix(tmp, m);
  fs::rename(tmp, path);
}

void save_parcellation_atomic(const fs::path& path, const Parcellation& p) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  save_parcellation(tmp, p);
  fs::rename(tmp, path);
}

std::vector<std::string> param_column_names(int length) {
  const auto& names = DmfParams::names();
  std::vector<std::string> out;
  if (length == kHomogeneousLength) {
    for (const auto n : names) out.emplace_back(n);
    return out;
  }
  for (const RsnLabel r : kAllRsn) {
    for (const auto n : names) out.push_back(std::string(to_string(r)) + "." + std::string(n));
  }
  return out;
}

json sim_json(const SimConfig& sim) {
  return json{{"duration_ms", sim.duration_ms}, {"dt_ms", sim.dt_ms}, {"sample_every_ms", sim.sample_every_ms},
              {"transient_ms", sim.transient_ms}, {"tr_ms", sim.tr_ms}};
}

void add_sim_options(CLI::App* sub, SimConfig& sim) {
  sub->add_option("--sim-duration", sim.duration_ms, "Simulated time per evaluation (ms)")->capture_default_str();
  sub->add_option("--sim-dt", sim.dt_ms, "Euler-Maruyama step (ms)")->capture_default_str();
  sub->add_option("--sim-transient", sim.transient_ms, "Discarded start-up time (ms)")->capture_default_str();
  sub->add_option("--tr", sim.tr_ms, "BOLD sampling interval (ms)")->capture_default_str();
}

// Declared for --help only; expand_config() consumes the flag before parsing.
void add_config(CLI::App* sub) {
  sub->add_option("--config", "Flat `key = value` file of long-flag names; command-line flags override it");
}

bool flag_given(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
}

/// Splices `--config FILE` entries in after the subcommand name. Keys map to
/// long flags; a key also given on the command line is skipped. Unknown keys
/// surface as ordinary unexpected-argument errors.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 == args.size()) throw CLI::ArgumentMismatch("--config needs a file name");
      path = args[++i];
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty() || rest.empty()) return rest;
  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigTOML().from_file(path)) {
    if (!item.parents.empty()) throw CLI::ConfigError("config sections are not supported: " + item.fullname());
    const std::string flag = "--" + item.name;
    if (flag_given(rest, flag)) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") injected.push_back(flag);
      continue;
    }
    injected.push_back(flag);
    injected.insert(injected.end(), item.inputs.begin(), item.inputs.end());
  }
  rest.insert(rest.begin() + 1, injected.begin(), injected.end());
  return rest;
}

/// Strategy directories present under fit_dir, in canonical order.
std::vector<Strategy> strategies_present(const fs::path& fit_dir) {
  std::vector<Strategy> out;
  for (const Strategy s : kAllStrategies) {
    if (fs::exists(fit_dir / std::string(to_string(s)) / "summary.csv")) out.push_back(s);
  }
  if (out.empty()) throw DataError("no fit outputs under " + fit_dir.string());
  return out;
}

std::vector<Strategy> resolve_strategies(const std::vector<std::string>& names, const fs::path& fit_dir) {
  if (names.empty()) return strategies_present(fit_dir);
  std::vector<Strategy> out;
  for (const auto& n : names) out.push_back(parse_strategy(n));
  return out;
}

fs::path genome_path(const fs::path& fit_dir, Strategy s, const std::string& id) {
  return fit_dir / std::string(to_string(s)) / (id + ".genome.json");
}

/// Physical parameter vectors of every cohort subject; names the first
/// missing file.
std::map<std::string, std::vector<double>> load_fitted(const Cohort& cohort, const fs::path& fit_dir, Strategy s,
                                                       const ParamRanges& ranges) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& subj : cohort.subjects) {
    const fs::path p = genome_path(fit_dir, s, subj.id);
    if (!fs::exists(p)) throw DataError("missing fit output " + p.string());
    out[subj.id] = to_physical(read_genome(p), ranges);
  }
  return out;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  SynthConfig config;
  std::string truth = "homogeneous";
  bool no_targets = false;
  std::string out;
};

void cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthConfig config = a.config;
  config.with_targets = !a.no_targets;
  Truth truth;
  if (a.truth == "homogeneous") {
    truth = default_truth();
  } else if (a.truth == "heterogeneous") {
    truth = heterogeneous_truth();
  } else {
    throw std::invalid_argument("--truth must be homogeneous or heterogeneous");
  }
  const SynthCohort synth = synth_cohort(config, truth);
  const fs::path dir = a.out;

  save_parcellation_atomic(dir / "parcellation.csv", synth.cohort.parcellation);
  json subjects = json::array();
  json per_subject = json::object();
  for (std::size_t s = 0; s < synth.cohort.subjects.size(); ++s) {
    const auto& rec = synth.cohort.subjects[s];
    const std::string sc_rel = "sc/" + rec.id + ".csv";
    const std::string fc_rel = "fc/" + rec.id + ".csv";
    save_matrix_atomic(dir / sc_rel, rec.sc.weights);
    save_matrix_atomic(dir / fc_rel, rec.fc_empirical);
    json entry{{"id", rec.id}, {"sc_path", sc_rel}, {"fc_path", fc_rel}};
    if (!rec.behavior.empty()) entry["behavior"] = rec.behavior;
    subjects.push_back(entry);
    per_subject[rec.id] = json{{"values", synth.subject_truth[s]}, {"latents", synth.latents[s]}};
  }
  write_json(dir / "manifest.json", json{{"parcellation_path", "parcellation.csv"}, {"subjects", subjects}});

  const auto values = truth_vector(truth);
  write_json(dir / "truth.json", json{{"kind", a.truth},
                                       {"names", param_column_names(static_cast<int>(values.size()))},
                                       {"values", values},
                                       {"subjects", per_subject}});
  json meta = meta_base("synth");
  meta["seed"] = config.seed;
  meta["config"] = json{{"regions", config.n_regions},         {"per_rsn", config.regions_per_rsn},
                        {"subjects", config.n_subjects},       {"noise", config.noise_level},
                        {"truth", a.truth},                    {"targets", config.with_targets},
                        {"param_coupling", config.param_coupling}, {"sc_log_sd", config.sc_log_sd}};
  write_json(dir / "run_meta.json", meta);
  out << "synth: wrote " << synth.cohort.subjects.size() << " subjects to " << dir.string() << "\n";
}

// ---------------------------------------------------------------- fit

struct ExecArgs {
  int threads = 0;
  bool serial = false;
};

struct FitArgs {
  std::string manifest;
  std::string out;
  std::string strategy = "hico";
  std::string backend = "moments";
  GaConfig ga;
  SimConfig sim;
  std::vector<std::string> only;
  bool population_log = false;
  ExecArgs exec;
};

std::string population_csv_row(int generation, int phase, int slot, const Individual& ind) {
  std::string genes;
  for (std::size_t i = 0; i < ind.genome.genes.size(); ++i) {
    if (i) genes += ' ';
    genes += std::to_string(ind.genome.genes[i]);
  }
  return std::to_string(generation) + "," + std::to_string(phase) + "," + std::to_string(slot) + "," +
         format_double(ind.score) + "," + genes + "\n";
}

void cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const Strategy strategy = parse_strategy(a.strategy);
  const Backend backend = parse_backend(a.backend);
  a.ga.validate();
  const Cohort cohort = load_cohort(a.manifest);
  const ParamRanges ranges = ParamRanges::defaults();
  const fs::path dir = fs::path(a.out) / std::string(to_string(strategy));
  const RngStream run(a.ga.seed);

  std::vector<const SubjectRecord*> todo;
  for (const auto& s : cohort.subjects) {
    if (a.only.empty() || std::find(a.only.begin(), a.only.end(), s.id) != a.only.end()) todo.push_back(&s);
  }
  for (const auto& id : a.only) static_cast<void>(cohort.subject(id));  // names unknown ids

  CsvTable summary{{"subject_id", "strategy", "best_score", "evaluations", "status"}, {}};
  std::string final_line = "fit " + std::string(to_string(strategy)) + ":";
  bool failed = false;
  for (const SubjectRecord* subject : todo) {
    try {
      std::optional<std::uint64_t> shuffle;
      if (strategy == Strategy::Shuffled) shuffle = shuffle_seed_for(a.ga.seed, subject->id);
      const Schedule schedule = build_schedule(strategy, a.ga.total_generations, shuffle);
      GaConfig ga = a.ga;
      ga.seed = run.derive("subject").derive(subject->id).key();
      SimConfig sim = a.sim;
      sim.seed = run.derive("simulation").derive(subject->id).key();
      const Evaluator eval = make_evaluator(backend, ranges, cohort.parcellation, *subject, sim);

      EvolveOptions opts;
      opts.parallel = !a.exec.serial;
      opts.threads = a.exec.threads;
      std::string population;
      if (a.population_log) {
        population = "generation,phase_index,slot,score,genes\n";
        opts.observer = [&](int gen, int phase, const std::vector<Individual>& pop) {
          for (std::size_t i = 0; i < pop.size(); ++i) population += population_csv_row(gen, phase, static_cast<int>(i), pop[i]);
        };
      }
      const EvolveResult result = evolve(ga, schedule, eval, opts);

      CsvTable log{{"generation", "best_score", "mean_score", "phase_index"}, {}};
      for (const auto& r : result.records) {
        log.rows.push_back({std::to_string(r.generation), format_double(r.best_score), format_double(r.mean_score),
                            std::to_string(r.phase_index)});
      }
      write_text_atomic(dir / (subject->id + ".generations.csv"), to_csv(log));
      if (a.population_log) write_text_atomic(dir / (subject->id + ".population.csv"), population);
      write_json(dir / (subject->id + ".genome.json"), genome_json(result.best));
      summary.rows.push_back({subject->id, std::string(to_string(strategy)), format_double(result.best_score),
                              std::to_string(result.evaluations), "ok"});
      final_line += " " + subject->id + "=" + format_double(result.best_score);
    } catch (const std::exception& e) {
      failed = true;
      err << json{{"error", "subject_failed"}, {"subject", subject->id}, {"message", e.what()}}.dump() << "\n";
      summary.rows.push_back({subject->id, std::string(to_string(strategy)), "0", "0", "failed"});
      final_line += " " + subject->id + "=failed";
    }
  }
  write_text_atomic(dir / "summary.csv", to_csv(summary));
  json meta = meta_base("fit");
  meta["seed"] = a.ga.seed;
  meta["strategy"] = to_string(strategy);
  meta["backend"] = to_string(backend);
  meta["manifest"] = a.manifest;
  meta["ga"] = json{{"pop_size", a.ga.pop_size}, {"elite", a.ga.elite_count}, {"tournament_k", a.ga.tournament_k},
                    {"p_mut", a.ga.p_mut},       {"generations", a.ga.total_generations}};
  if (backend == Backend::Simulation) meta["sim"] = sim_json(a.sim);
  write_json(dir / "run_meta.json", meta);
  out << final_line << "\n";
  if (failed) throw PartialFailure{};
}

// ---------------------------------------------------------------- loo

struct LooArgs {
  std::string manifest;
  std::string fit_dir;
  std::vector<std::string> strategies;
  double trim = 0.1;
  std::string backend = "moments";
  SimConfig sim;
  std::uint64_t seed = 0;
  std::string out;
  ExecArgs exec;
};

void cmd_loo(const LooArgs& a, std::ostream& out) {
  const Cohort cohort = load_cohort(a.manifest);
  const fs::path fit_dir = a.fit_dir;
  const auto strategies = resolve_strategies(a.strategies, fit_dir);
  const Backend backend = parse_backend(a.backend);
  const ParamRanges ranges = ParamRanges::defaults();
  const fs::path target = a.out.empty() ? fit_dir / "loo.csv" : fs::path(a.out);

  CsvTable table{{"subject_id", "strategy", "loo_score", "stable"}, {}};
  int unstable = 0;
  json names = json::array();
  for (const Strategy s : strategies) {
    const auto fitted = load_fitted(cohort, fit_dir, s, ranges);
    LooOptions opts;
    opts.trim = a.trim;
    opts.backend = backend;
    opts.sim = a.sim;
    opts.sim.seed = RngStream(a.seed).derive("loo").derive(to_string(s)).key();
    opts.parallel = !a.exec.serial;
    opts.threads = a.exec.threads;
    for (const auto& r : loo_evaluate(cohort, fitted, opts)) {
      table.rows.push_back({r.subject_id, std::string(to_string(s)), format_double(r.loo_score), bool_text(r.stable)});
      unstable += r.stable ? 0 : 1;
    }
    names.push_back(to_string(s));
  }
  write_text_atomic(target, to_csv(table));
  json meta = meta_base("loo");
  meta["seed"] = a.seed;
  meta["strategies"] = names;
  meta["backend"] = to_string(backend);
  meta["trim"] = a.trim;
  meta["manifest"] = a.manifest;
  if (backend == Backend::Simulation) meta["sim"] = sim_json(a.sim);
  write_json(target.string() + ".meta.json", meta);
  out << "loo: " << table.rows.size() << " rows, " << unstable << " unstable -> " << target.string() << "\n";
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string manifest;
  std::string fit_dir;
  std::vector<std::string> strategies;
  double lambda = 1.0;
  int n_perm = 1000;
  int k_folds = 5;
  bool in_sample = false;
  std::string feature_mode = "per-rsn";
  std::uint64_t seed = 0;
  std::string out;
  ExecArgs exec;
};

void cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  const Cohort cohort = load_cohort(a.manifest);
  const fs::path fit_dir = a.fit_dir;
  const auto strategies = resolve_strategies(a.strategies, fit_dir);
  FeatureMode mode;
  if (a.feature_mode == "per-rsn") {
    mode = FeatureMode::PerRsn;
  } else if (a.feature_mode == "average") {
    mode = FeatureMode::RsnAverage;
  } else {
    throw std::invalid_argument("--feature-mode must be per-rsn or average");
  }
  const ParamRanges ranges = ParamRanges::defaults();
  const fs::path target_path = a.out.empty() ? fit_dir / "predict.csv" : fs::path(a.out);

  std::set<std::string> targets;
  for (const auto& s : cohort.subjects) {
    for (const auto& [name, value] : s.behavior) targets.insert(name);
  }
  if (targets.empty()) throw DataError("no behavioral targets in " + a.manifest);

  PermutationOptions popts;
  popts.k_folds = a.k_folds;
  popts.in_sample = a.in_sample;
  popts.parallel = !a.exec.serial;
  popts.threads = a.exec.threads;

  CsvTable table{{"target", "strategy", "rsn", "r2", "p", "q", "n_perm", "lambda", "feature_mode"}, {}};
  for (const Strategy s : strategies) {
    const auto fitted = load_fitted(cohort, fit_dir, s, ranges);
    for (const auto& target : targets) {
      std::vector<std::vector<double>> rows;
      std::vector<double> y;
      for (const auto& subj : cohort.subjects) {
        const auto it = subj.behavior.find(target);
        if (it == subj.behavior.end()) {
          err << json{{"warning", "subject_excluded"}, {"subject", subj.id}, {"target", target}}.dump() << "\n";
          continue;
        }
        rows.push_back(fitted.at(subj.id));
        y.push_back(it->second);
      }
      const Vector yv = Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
      std::vector<std::string> rsn_names;
      std::vector<PermutationResult> results;
      auto test = [&](const Matrix& X, const std::string& rsn) {
        const std::uint64_t seed =
            RngStream(a.seed).derive("predict").derive(to_string(s)).derive(target).derive(rsn).key();
        results.push_back(permutation_test(X, yv, a.lambda, a.n_perm, seed, popts));
        rsn_names.push_back(rsn);
      };
      if (mode == FeatureMode::PerRsn) {
        for (const RsnLabel r : kAllRsn) test(extract_features(rows, mode, r), std::string(to_string(r)));
      } else {
        test(extract_features(rows, mode), "average");
      }
      std::vector<double> p;
      for (const auto& r : results) p.push_back(r.p_value);
      const auto q = bh_fdr(p);
      for (std::size_t i = 0; i < results.size(); ++i) {
        table.rows.push_back({target, std::string(to_string(s)), rsn_names[i], format_double(results[i].r2_true),
                              format_double(p[i]), format_double(q[i]), std::to_string(a.n_perm),
                              format_double(a.lambda), a.feature_mode});
      }
    }
  }
  write_text_atomic(target_path, to_csv(table));
  json meta = meta_base("predict");
  meta["seed"] = a.seed;
  json names = json::array();
  for (const Strategy s : strategies) names.push_back(to_string(s));
  meta["strategies"] = names;
  meta["lambda"] = a.lambda;
  meta["n_perm"] = a.n_perm;
  meta["k_folds"] = a.k_folds;
  meta["in_sample"] = a.in_sample;
  meta["feature_mode"] = a.feature_mode;
  meta["manifest"] = a.manifest;
  write_json(target_path.string() + ".meta.json", meta);
  out << "predict: " << table.rows.size() << " rows -> " << target_path.string() << "\n";
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::string fit_dir;
  std::string loo;
  std::string out;
};

void cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path fit_dir = a.fit_dir;
  const fs::path dir = a.out.empty() ? fit_dir / "report" : fs::path(a.out);
  const auto strategies = strategies_present(fit_dir);
  const ParamRanges ranges = ParamRanges::defaults();

  CsvTable fitness{{"subject_id", "strategy", "best_score"}, {}};
  std::vector<std::string> written;
  for (const Strategy s : strategies) {
    const fs::path sdir = fit_dir / std::string(to_string(s));
    const CsvTable summary = read_csv(sdir / "summary.csv");
    const int id_col = summary.column("subject_id");
    const int score_col = summary.column("best_score");
    const int status_col = summary.column("status");
    std::optional<CsvTable> params;
    for (const auto& row : summary.rows) {
      fitness.rows.push_back({row[id_col], std::string(to_string(s)), row[score_col]});
      if (row[status_col] != "ok") continue;
      const auto phys = to_physical(read_genome(sdir / (row[id_col] + ".genome.json")), ranges);
      if (!params) {
        params.emplace();
        params->header = {"subject_id", "strategy"};
        for (auto& n : param_column_names(static_cast<int>(phys.size()))) params->header.push_back(std::move(n));
      }
      if (phys.size() + 2 != params->header.size()) throw DataError(sdir.string() + ": fitted genomes mix modes");
      std::vector<std::string> cells{row[id_col], std::string(to_string(s))};
      for (const double v : phys) cells.push_back(format_double(v));
      params->rows.push_back(std::move(cells));
    }
    if (params) {
      const std::string name = "parameters_" + std::string(to_string(s)) + ".csv";
      write_text_atomic(dir / name, to_csv(*params));
      written.push_back(name);
    }
  }
  write_text_atomic(dir / "fitness_by_strategy.csv", to_csv(fitness));
  written.insert(written.begin(), "fitness_by_strategy.csv");

  const fs::path loo_path = a.loo.empty() ? fit_dir / "loo.csv" : fs::path(a.loo);
  if (fs::exists(loo_path)) {
    CsvTable loo = read_csv(loo_path);
    CsvTable outt{{"subject_id", "strategy", "loo_score", "stable"}, {}};
    const int c0 = loo.column("subject_id"), c1 = loo.column("strategy"), c2 = loo.column("loo_score"),
              c3 = loo.column("stable");
    for (const auto& row : loo.rows) outt.rows.push_back({row[c0], row[c1], row[c2], row[c3]});
    write_text_atomic(dir / "loo_by_strategy.csv", to_csv(outt));
    written.push_back("loo_by_strategy.csv");
  } else if (!a.loo.empty()) {
    throw DataError("missing file " + loo_path.string());
  } else {
    err << json{{"warning", "no_loo_table"}, {"path", loo_path.string()}}.dump() << "\n";
  }
  json meta = meta_base("report");
  meta["fit_dir"] = a.fit_dir;
  meta["files"] = written;
  json names = json::array();
  for (const Strategy s : strategies) names.push_back(to_string(s));
  meta["strategies"] = names;
  write_json(dir / "run_meta.json", meta);
  out << "report: " << written.size() << " tables -> " << dir.string() << "\n";
}

void add_exec(CLI::App* sub, ExecArgs& e) {
  sub->add_option("--threads", e.threads, "Worker threads (0: OpenMP default); never changes results");
  sub->add_flag("--serial", e.serial, "Disable parallel evaluation");
}

void report_error(std::ostream& err, const std::string& kind, const std::string& command, const std::string& message) {
  err << json{{"error", kind}, {"command", command}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Curriculum-based fitting of whole-brain mean-field models to functional connectivity", "hico"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic cohort");
  add_config(s);
  s->add_option("--regions", synth.config.n_regions)->capture_default_str();
  s->add_option("--per-rsn", synth.config.regions_per_rsn)->capture_default_str();
  s->add_option("--subjects", synth.config.n_subjects)->capture_default_str();
  s->add_option("--noise", synth.config.noise_level)->capture_default_str();
  s->add_option("--seed", synth.config.seed)->capture_default_str();
  s->add_option("--truth", synth.truth, "homogeneous | heterogeneous")->capture_default_str();
  s->add_flag("--no-targets", synth.no_targets, "Omit behavioral targets");
  s->add_option("--out", synth.out, "Output directory")->required();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit every subject with one strategy");
  add_config(f);
  f->add_option("--manifest", fit.manifest)->required();
  f->add_option("--out", fit.out, "Output root; files go to <out>/<strategy>/")->required();
  f->add_option("--strategy", fit.strategy, "homogeneous | heterogeneous | hico | reverse | shuffled")->capture_default_str();
  f->add_option("--backend", fit.backend, "moments | simulation")->capture_default_str();
  f->add_option("--generations", fit.ga.total_generations)->capture_default_str();
  f->add_option("--pop-size", fit.ga.pop_size)->capture_default_str();
  f->add_option("--elite", fit.ga.elite_count)->capture_default_str();
  f->add_option("--tournament-k", fit.ga.tournament_k)->capture_default_str();
  f->add_option("--p-mut", fit.ga.p_mut)->capture_default_str();
  f->add_option("--seed", fit.ga.seed)->capture_default_str();
  f->add_option("--subject", fit.only, "Restrict to these subject ids");
  f->add_flag("--population-log", fit.population_log, "Also write every generation's sorted population");
  add_sim_options(f, fit.sim);
  add_exec(f, fit.exec);

  LooArgs loo;
  auto* l = app.add_subcommand("loo", "Leave-one-out evaluation of trimmed-mean parameters");
  add_config(l);
  l->add_option("--manifest", loo.manifest)->required();
  l->add_option("--fit-dir", loo.fit_dir)->required();
  l->add_option("--strategy", loo.strategies, "Strategies to evaluate (default: all fitted)");
  l->add_option("--trim", loo.trim)->capture_default_str();
  l->add_option("--backend", loo.backend)->capture_default_str();
  l->add_option("--seed", loo.seed)->capture_default_str();
  l->add_option("--out", loo.out, "CSV path (default <fit-dir>/loo.csv)");
  add_sim_options(l, loo.sim);
  add_exec(l, loo.exec);

  PredictArgs pred;
  auto* p = app.add_subcommand("predict", "Ridge prediction of behavioral targets from fitted parameters");
  add_config(p);
  p->add_option("--manifest", pred.manifest)->required();
  p->add_option("--fit-dir", pred.fit_dir)->required();
  p->add_option("--strategy", pred.strategies, "Strategies to use (default: all fitted)");
  p->add_option("--lambda", pred.lambda)->capture_default_str();
  p->add_option("--n-perm", pred.n_perm)->capture_default_str();
  p->add_option("--k-folds", pred.k_folds)->capture_default_str();
  p->add_flag("--in-sample", pred.in_sample, "Score R^2 on the training rows");
  p->add_option("--feature-mode", pred.feature_mode, "per-rsn | average")->capture_default_str();
  p->add_option("--seed", pred.seed)->capture_default_str();
  p->add_option("--out", pred.out, "CSV path (default <fit-dir>/predict.csv)");
  add_exec(p, pred.exec);

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Summary tables across strategies");
  add_config(r);
  r->add_option("--fit-dir", rep.fit_dir)->required();
  r->add_option("--loo", rep.loo, "LOO CSV (default <fit-dir>/loo.csv when present)");
  r->add_option("--out", rep.out, "Output directory (default <fit-dir>/report)");

  std::string command = "hico";
  try {
    const auto expanded = expand_config(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    report_error(err, "usage", command, e.what());
    return 2;
  }

  try {
    if (*s) {
      command = "synth";
      cmd_synth(synth, out);
    } else if (*f) {
      command = "fit";
      cmd_fit(fit, out, err);
    } else if (*l) {
      command = "loo";
      cmd_loo(loo, out);
    } else if (*p) {
      command = "predict";
      cmd_predict(pred, out, err);
    } else if (*r) {
      command = "report";
      cmd_report(rep, out, err);
    }
  } catch (const PartialFailure&) {
    return 1;
  } catch (const std::invalid_argument& e) {
    report_error(err, "invalid_argument", command, e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error(err, "runtime", command, e.what());
    return 1;
  }
  return 0;
}

}  // namespace hico::cli

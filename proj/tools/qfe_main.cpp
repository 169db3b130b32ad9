#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qfe/benchmark.hpp"
#include "qfe/calibrate.hpp"
#include "qfe/cost.hpp"
#include "qfe/io.hpp"
#include "qfe/opcount.hpp"
#include "qfe/simulate.hpp"

namespace fs = std::filesystem;
using namespace qfe;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitOutputConflict = 3;
constexpr int kExitDegenerate = 4;

struct OutputConflict : std::runtime_error {
  using std::runtime_error::runtime_error;
};

CostKind cost_kind_of(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Wes: return CostKind::WindowSearch;
    case StrategyKind::Awes: return CostKind::WindowSearchEss;
    case StrategyKind::Sh: return CostKind::SigmaHeuristic;
    case StrategyKind::Pgh: return CostKind::PairGapHeuristic;
    case StrategyKind::Rts: return CostKind::RandomSchedule;
  }
  throw ConfigError("unknown strategy kind");
}

struct StrategyFlags {
  double multiplier = 1.0;
  int candidates = 50;
  int hit_rank = 3;
  int hits_to_expand = 3;
  int warmup_shots = 10;
  double warmup_time = 1.0;
  double initial_upper = 100.0;
  int shots = 10;
  double ess_target = 0.5;
  double rts_cap = 0.0;  // 0 derives it from the model
};

void add_strategy_flags(CLI::App* cmd, StrategyFlags& f) {
  cmd->add_option("--heuristic-multiplier", f.multiplier,
                  "scale c of the closed-form heuristics")
      ->capture_default_str();
  cmd->add_option("--candidates", f.candidates, "window-search candidate times per iteration")
      ->capture_default_str();
  cmd->add_option("--hit-rank", f.hit_rank, "top ranks (by time) that count as a hit")
      ->capture_default_str();
  cmd->add_option("--hits-to-expand", f.hits_to_expand, "hits needed to double the window")
      ->capture_default_str();
  cmd->add_option("--warmup-shots", f.warmup_shots, "single-shot measurements before the search")
      ->capture_default_str();
  cmd->add_option("--warmup-time", f.warmup_time, "evolution time of warmup measurements")
      ->capture_default_str();
  cmd->add_option("--initial-upper", f.initial_upper, "initial window upper edge")
      ->capture_default_str();
  cmd->add_option("--shots", f.shots, "shots per optimized measurement")->capture_default_str();
  cmd->add_option("--ess-target", f.ess_target, "ESS fraction targeted by awes")
      ->capture_default_str();
  cmd->add_option("--rts-cap", f.rts_cap,
                  "random-schedule time cap; 0 = coherence time when set, else 100");
}

StrategyConfig build_strategy(StrategyKind kind, const StrategyFlags& f,
                              const LikelihoodModel& model) {
  StrategyConfig s = default_strategy(kind);
  s.heuristic_multiplier = f.multiplier;
  s.candidates_per_iter = f.candidates;
  s.hit_rank = f.hit_rank;
  s.hits_to_expand = f.hits_to_expand;
  s.warmup_shots = f.warmup_shots;
  s.warmup_time = f.warmup_time;
  s.initial_upper = f.initial_upper;
  s.shots_per_measurement = f.shots;
  s.ess_target_fraction = f.ess_target;
  s.rts_cap = f.rts_cap > 0.0 ? f.rts_cap
              : model.coherence_time ? *model.coherence_time
                                     : 100.0;
  return s;
}

LikelihoodModel build_model(double coherence_time) {
  if (coherence_time < 0.0) throw ConfigError("coherence time must be positive (0 = ideal)");
  return coherence_time > 0.0 ? LikelihoodModel::damped(coherence_time) : LikelihoodModel::ideal();
}

// exit 3 unless the directory is absent or --force was given
void claim_output_dir(const fs::path& out, bool force) {
  if (fs::exists(out) && !force)
    throw OutputConflict("output directory '" + out.string() +
                         "' already exists (use --force to overwrite)");
  fs::create_directories(out);
}

struct RunArgs {
  std::string strategy;
  double omega = 0.0;
  bool omega_set = false;
  std::uint64_t seed = 1;
  double cet_budget = 1e4;
  long long max_experiments = 20000;
  int particles = 2000;
  double coherence_time = 0.0;
  std::string out;
  bool force = false;
  bool count_ops = false;
  StrategyFlags strategy_flags;
};

int cmd_run(const RunArgs& a) {
  const LikelihoodModel model = build_model(a.coherence_time);
  RunConfig rc;
  rc.strategy = build_strategy(strategy_kind_from_string(a.strategy), a.strategy_flags, model);
  rc.particles = a.particles;
  rc.cet_budget = a.cet_budget;
  rc.max_experiments = a.max_experiments;
  rc.seed = a.seed;

  double omega = a.omega;
  if (!a.omega_set) {
    Rng rng = make_rng(derive_seed(a.seed, 0x03e6a));
    omega = uniform_open_closed(rng, rc.support.lower, rc.support.upper);
  }
  const TrueSystem system{omega, model};

  if (!a.out.empty()) claim_output_dir(a.out, a.force);
  if (a.count_ops) opcount::reset();
  const RunTrace trace = run_estimation(system, rc);

  const TraceStep* last = trace.steps.empty() ? nullptr : &trace.steps.back();
  std::cout << "strategy " << to_string(rc.strategy.kind) << ", omega_true "
            << format_double(omega) << ", seed " << a.seed << "\n";
  if (last) {
    std::cout << "measurements " << last->n_experiments << ", cet " << format_double(last->cet)
              << "\nestimate " << format_double(last->estimate) << " (std "
              << format_double(last->std_dev) << ", ess " << format_double(last->ess) << ")\n";
  }
  std::cout << "terminal status: " << to_string(trace.status) << "\n";

  if (a.count_ops) {
    const auto& c = opcount::counters();
    CostModel cm{a.particles, rc.strategy.candidates_per_iter,
                 last ? std::max<std::int64_t>(1, last->n_experiments) : 1};
    std::cout << "measured ops: updates " << c.bayes_updates << ", weight products "
              << c.weight_products << ", integrals " << c.integrals << " (" << c.integral_ops
              << " ops)\n";
    try {
      // closed form counts per binary outcome; shots vary by strategy
      std::int64_t shots = 0;
      for (const TraceStep& s : trace.steps) shots += s.shots;
      cm.experiments = std::max<std::int64_t>(1, shots);
      std::cout << "closed-form total for N=" << cm.experiments << " outcomes: "
                << predicted_cost(cm, cost_kind_of(rc.strategy.kind)) << " ops\n";
    } catch (const ConfigError& e) {
      std::cout << "closed-form total unavailable: " << e.what() << "\n";
    }
  }

  if (!a.out.empty()) {
    write_trace_csv(fs::path(a.out) / "trace.csv", trace);
    write_text(fs::path(a.out) / "run.json", run_sidecar(rc, system, trace).dump(2) + "\n");
    std::cout << "wrote " << (fs::path(a.out) / "trace.csv").string() << "\n";
  }
  return trace.status == TerminalStatus::Degenerate ? kExitDegenerate : 0;
}

struct BenchArgs {
  std::string strategies = "wes,awes,sh,pgh,rts";
  int runs = 20;
  std::uint64_t seed = 1;
  double cet_budget = 1e4;
  long long max_experiments = 20000;
  int particles = 2000;
  double coherence_time = 0.0;
  int bins = 30;
  double fit_window = 0.8;
  int workers = 0;
  std::string normalization = "relative";
  std::string out = "bench_out";
  bool force = false;
  StrategyFlags strategy_flags;
};

std::vector<StrategyKind> parse_strategy_list(const std::string& csv) {
  std::vector<StrategyKind> kinds;
  std::string token;
  for (std::size_t i = 0; i <= csv.size(); ++i) {
    if (i < csv.size() && csv[i] != ',') {
      token += csv[i];
      continue;
    }
    if (!token.empty()) kinds.push_back(strategy_kind_from_string(token));
    token.clear();
  }
  if (kinds.empty()) throw ConfigError("--strategies must name at least one strategy");
  return kinds;
}

int cmd_bench(const BenchArgs& a) {
  BenchmarkConfig bc;
  bc.model = build_model(a.coherence_time);
  for (StrategyKind kind : parse_strategy_list(a.strategies))
    bc.strategies.push_back(build_strategy(kind, a.strategy_flags, bc.model));
  bc.n_runs = a.runs;
  bc.particles = a.particles;
  bc.cet_budget = a.cet_budget;
  bc.max_experiments = a.max_experiments;
  bc.bins = a.bins;
  bc.fit_window = a.fit_window;
  bc.master_seed = a.seed;
  bc.workers = a.workers;
  bc.normalization = normalization_from_string(a.normalization);
  validate(bc);

  claim_output_dir(a.out, a.force);
  const BenchmarkResult result = run_benchmark(bc);
  const std::vector<StrategySummary> summaries = summarize(result);
  write_benchmark_outputs(a.out, result, summaries);

  std::cout << "strategy   exponent   multiplier   residual   mean_n   degenerate\n";
  for (const StrategySummary& s : summaries) {
    std::cout << to_string(s.kind);
    for (std::size_t pad = to_string(s.kind).size(); pad < 11; ++pad) std::cout << ' ';
    if (s.fit) {
      std::cout << format_double(s.fit->exponent) << "   " << format_double(s.fit->multiplier)
                << "   " << format_double(s.fit->residual);
    } else {
      std::cout << "(no fit: " << s.fit_failure << ")";
    }
    std::cout << "   " << format_double(s.mean_measurements) << "   " << s.degenerate_count
              << "\n";
  }
  std::cout << "outputs in " << a.out << "\n";

  const std::vector<std::string> failures = benchmark_failures(result);
  for (const std::string& f : failures) std::cerr << "failure: " << f << "\n";
  return failures.empty() ? 0 : kExitDegenerate;
}

struct CalibrateArgs {
  std::string kind;
  std::vector<double> grid;
  int runs = 10;
  double cet_budget = 2000.0;
  int particles = 1000;
  std::uint64_t seed = 1;
  double coherence_time = 0.0;
  std::string out;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const StrategyKind kind = strategy_kind_from_string(a.kind);
  const LikelihoodModel model = build_model(a.coherence_time);
  CalibrationSettings settings;
  settings.cet_budget = a.cet_budget;
  settings.particles = a.particles;
  settings.seed = a.seed;
  const CalibrationOutcome outcome = calibrate_multiplier(kind, model, a.runs, a.grid, settings);

  std::cout << "multiplier   rmse   completed_runs\n";
  for (const CalibrationScore& s : outcome.scores)
    std::cout << format_double(s.multiplier) << "   " << format_double(s.rmse) << "   "
              << s.completed_runs << "\n";
  std::cout << "selected " << format_double(outcome.selected) << "\n";

  if (!a.out.empty()) {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["coherence_time"] = a.coherence_time > 0.0 ? nlohmann::json(a.coherence_time)
                                                 : nlohmann::json(nullptr);
    j["grid"] = a.grid;
    j["selected"] = outcome.selected;
    nlohmann::json scores = nlohmann::json::array();
    for (const CalibrationScore& s : outcome.scores)
      scores.push_back({{"multiplier", s.multiplier},
                        {"rmse", s.rmse},
                        {"completed_runs", s.completed_runs}});
    j["scores"] = scores;
    write_text(a.out, j.dump(2) + "\n");
    std::cout << "wrote " << a.out << "\n";
  }
  return 0;
}

struct CostArgs {
  std::int64_t particles = 0;
  std::int64_t controls = 0;
  std::int64_t experiments = 0;
};

int cmd_cost(const CostArgs& a) {
  const CostModel model{a.particles, a.controls, a.experiments};
  std::cout << "K=" << model.particle_count << " M=" << model.controls
            << " N=" << model.experiments << "\n";
  for (const CostKind kind : all_cost_kinds()) {
    std::cout << to_string(kind);
    for (std::size_t pad = to_string(kind).size(); pad < 15; ++pad) std::cout << ' ';
    try {
      std::cout << predicted_cost(model, kind) << "\n";
    } catch (const ConfigError&) {
      std::cout << "overflow (exceeds 64-bit op count)\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated adaptive Bayesian frequency estimation of a two-level system"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key-value config file with [run]/[bench]/... sections");

  RunArgs ra;
  CLI::App* run = app.add_subcommand("run", "One estimation run traced to CSV");
  run->add_option("--strategy", ra.strategy, "wes|awes|sh|pgh|rts")->required();
  auto* omega_opt =
      run->add_option("--omega", ra.omega, "true frequency; drawn from the prior when omitted");
  run->add_option("--seed", ra.seed, "run seed")->capture_default_str();
  run->add_option("--cet-budget", ra.cet_budget, "cumulative evolution time budget")
      ->capture_default_str();
  run->add_option("--max-experiments", ra.max_experiments, "measurement cap")
      ->capture_default_str();
  run->add_option("--particles", ra.particles, "ensemble size K")->capture_default_str();
  run->add_option("--coherence-time", ra.coherence_time, "exponential damping constant; 0 = ideal")
      ->capture_default_str();
  run->add_option("--out", ra.out, "output directory (trace.csv, run.json)");
  run->add_flag("--force", ra.force, "overwrite an existing output directory");
  run->add_flag("--count-ops", ra.count_ops, "print measured op counters next to the closed form");
  add_strategy_flags(run, ra.strategy_flags);

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "Multi-strategy scaling benchmark");
  bench->add_option("--strategies", ba.strategies, "comma list of strategies")
      ->capture_default_str();
  bench->add_option("--runs", ba.runs, "paired runs per strategy")->capture_default_str();
  bench->add_option("--seed", ba.seed, "master seed")->capture_default_str();
  bench->add_option("--cet-budget", ba.cet_budget, "cumulative evolution time budget")
      ->capture_default_str();
  bench->add_option("--max-experiments", ba.max_experiments, "per-run measurement cap")
      ->capture_default_str();
  bench->add_option("--particles", ba.particles, "ensemble size K")->capture_default_str();
  bench->add_option("--coherence-time", ba.coherence_time,
                    "exponential damping constant; 0 = ideal")
      ->capture_default_str();
  bench->add_option("--bins", ba.bins, "log-spaced cet bins")->capture_default_str();
  bench->add_option("--fit-window", ba.fit_window, "trailing fraction of curve points fitted")
      ->capture_default_str();
  bench->add_option("--workers", ba.workers, "worker threads; 0 = hardware concurrency")
      ->capture_default_str();
  bench->add_option("--normalization", ba.normalization, "relative|domain-width")
      ->capture_default_str();
  bench->add_option("--out", ba.out, "output directory")->capture_default_str();
  bench->add_flag("--force", ba.force, "overwrite an existing output directory");
  add_strategy_flags(bench, ba.strategy_flags);

  CalibrateArgs ca;
  CLI::App* calibrate = app.add_subcommand("calibrate", "Pick a heuristic multiplier from a grid");
  calibrate->add_option("--kind", ca.kind, "sh|pgh")->required();
  calibrate->add_option("--grid", ca.grid, "candidate multipliers")->required()->delimiter(',');
  calibrate->add_option("--runs", ca.runs, "calibration runs per grid value")
      ->capture_default_str();
  calibrate->add_option("--cet-budget", ca.cet_budget, "budget of each calibration run")
      ->capture_default_str();
  calibrate->add_option("--particles", ca.particles, "ensemble size K")->capture_default_str();
  calibrate->add_option("--seed", ca.seed, "calibration seed")->capture_default_str();
  calibrate->add_option("--coherence-time", ca.coherence_time,
                        "exponential damping constant; 0 = ideal")
      ->capture_default_str();
  calibrate->add_option("--out", ca.out, "optional JSON file for the selection");

  CostArgs co;
  CLI::App* cost = app.add_subcommand("cost", "Closed-form op counts for all strategy kinds");
  cost->add_option("--K", co.particles, "particles")->required()->check(CLI::PositiveNumber);
  cost->add_option("--M", co.controls, "candidate controls")->required()->check(CLI::PositiveNumber);
  cost->add_option("--N", co.experiments, "binary-outcome experiments")
      ->required()
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  ra.omega_set = omega_opt->count() > 0;

  try {
    if (app.got_subcommand(run)) return cmd_run(ra);
    if (app.got_subcommand(bench)) return cmd_bench(ba);
    if (app.got_subcommand(calibrate)) return cmd_calibrate(ca);
    return cmd_cost(co);
  } catch (const OutputConflict& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOutputConflict;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DegeneratePosteriorError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const DegenerateDistributionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

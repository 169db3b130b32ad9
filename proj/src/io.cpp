#include "qfe/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "qfe/cost.hpp"

namespace qfe {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json to_json(const ResampleConfig& cfg) {
  return {{"ess_threshold_fraction", cfg.ess_threshold_fraction},
          {"mh_steps", cfg.mh_steps},
          {"proposal_scale", cfg.proposal_scale}};
}

nlohmann::json to_json(const StrategyConfig& cfg) {
  nlohmann::json j{{"kind", to_string(cfg.kind)}};
  switch (cfg.kind) {
    case StrategyKind::Wes:
    case StrategyKind::Awes:
      j["candidates_per_iter"] = cfg.candidates_per_iter;
      j["hit_rank"] = cfg.hit_rank;
      j["hits_to_expand"] = cfg.hits_to_expand;
      j["warmup_shots"] = cfg.warmup_shots;
      j["warmup_time"] = cfg.warmup_time;
      j["initial_upper"] = cfg.initial_upper;
      j["shots_per_measurement"] = cfg.shots_per_measurement;
      if (cfg.kind == StrategyKind::Awes) j["ess_target_fraction"] = cfg.ess_target_fraction;
      break;
    case StrategyKind::Sh:
    case StrategyKind::Pgh:
      j["heuristic_multiplier"] = cfg.heuristic_multiplier;
      break;
    case StrategyKind::Rts:
      j["rts_cap"] = cfg.rts_cap;
      break;
  }
  return j;
}

namespace {

nlohmann::json model_json(const LikelihoodModel& model) {
  if (model.coherence_time) return {{"coherence_time", *model.coherence_time}};
  return {{"coherence_time", nullptr}};
}

nlohmann::json support_json(const Interval& support) {
  return {{"lower", support.lower}, {"upper", support.upper}};
}

}  // namespace

nlohmann::json to_json(const RunConfig& cfg) {
  return {{"strategy", to_json(cfg.strategy)},
          {"particles", cfg.particles},
          {"resample", to_json(cfg.resample)},
          {"cet_budget", cfg.cet_budget},
          {"max_experiments", cfg.max_experiments},
          {"support", support_json(cfg.support)}};
}

nlohmann::json to_json(const BenchmarkConfig& cfg) {
  nlohmann::json strategies = nlohmann::json::array();
  for (const StrategyConfig& s : cfg.strategies) strategies.push_back(to_json(s));
  return {{"strategies", strategies},
          {"n_runs", cfg.n_runs},
          {"model", model_json(cfg.model)},
          {"particles", cfg.particles},
          {"resample", to_json(cfg.resample)},
          {"cet_budget", cfg.cet_budget},
          {"max_experiments", cfg.max_experiments},
          {"bins", cfg.bins},
          {"fit_window", cfg.fit_window},
          {"master_seed", cfg.master_seed},
          {"normalization", to_string(cfg.normalization)},
          {"support", support_json(cfg.support)}};
}

nlohmann::json run_sidecar(const RunConfig& cfg, const TrueSystem& system,
                           const RunTrace& trace) {
  nlohmann::json j;
  j["config"] = to_json(cfg);
  j["config"]["model"] = model_json(system.model);
  j["seed"] = cfg.seed;
  j["omega_true"] = system.omega_true;
  j["terminal_status"] = to_string(trace.status);
  j["n_experiments"] = trace.steps.empty() ? 0 : trace.steps.back().n_experiments;
  j["final_cet"] = trace.steps.empty() ? 0.0 : trace.steps.back().cet;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::system_error(errno, std::generic_category(), "open " + path.string());
  out << content;
  if (!out) throw std::system_error(errno, std::generic_category(), "write " + path.string());
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace) {
  std::string body = "step,cet,t_chosen,shots,ones,estimate,std,ess,n_experiments\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& s = trace.steps[i];
    body += std::to_string(i + 1);
    body += ',';
    body += format_double(s.cet);
    body += ',';
    body += format_double(s.t_chosen);
    body += ',';
    body += std::to_string(s.shots);
    body += ',';
    body += std::to_string(s.ones);
    body += ',';
    body += format_double(s.estimate);
    body += ',';
    body += format_double(s.std_dev);
    body += ',';
    body += format_double(s.ess);
    body += ',';
    body += std::to_string(s.n_experiments);
    body += '\n';
  }
  write_text(path, body);
}

void write_curve_csv(const std::filesystem::path& path, const ScalingCurve& curve) {
  std::string body = "cet_center,rmse\n";
  for (const CurvePoint& p : curve.points) {
    body += format_double(p.cet_center);
    body += ',';
    body += format_double(p.rmse);
    body += '\n';
  }
  write_text(path, body);
}

std::vector<StrategySummary> summarize(const BenchmarkResult& result) {
  const std::vector<ExperimentCount> counts = experiment_count_table(result);
  std::vector<StrategySummary> summaries;
  for (std::size_t s = 0; s < result.per_strategy.size(); ++s) {
    const StrategyResult& sr = result.per_strategy[s];
    StrategySummary summary;
    summary.kind = sr.strategy.kind;
    summary.curve = strategy_curve(sr, result.config);
    summary.mean_measurements = counts[s].mean_measurements;
    summary.mean_shots = counts[s].mean_shots;
    summary.completed_runs = counts[s].completed_runs;
    summary.degenerate_count = static_cast<int>(sr.degenerate_runs.size());
    if (summary.curve.points.empty()) {
      summary.fit_failure = "no completed runs to bin";
    } else {
      try {
        summary.fit = fit_loglog(summary.curve, result.config.fit_window);
      } catch (const FitError& e) {
        summary.fit_failure = e.what();
      }
    }
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

namespace {

CostKind cost_kind_for(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Wes: return CostKind::WindowSearch;
    case StrategyKind::Awes: return CostKind::WindowSearchEss;
    case StrategyKind::Sh: return CostKind::SigmaHeuristic;
    case StrategyKind::Pgh: return CostKind::PairGapHeuristic;
    case StrategyKind::Rts: return CostKind::RandomSchedule;
  }
  throw ConfigError("unknown strategy kind");
}

}  // namespace

void write_benchmark_outputs(const std::filesystem::path& out_dir, const BenchmarkResult& result,
                             const std::vector<StrategySummary>& summaries) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "traces");
  fs::create_directories(out_dir / "curves");

  for (const StrategyResult& sr : result.per_strategy) {
    const fs::path dir = out_dir / "traces" / to_string(sr.strategy.kind);
    fs::create_directories(dir);
    for (std::size_t r = 0; r < sr.traces.size(); ++r)
      write_trace_csv(dir / (std::to_string(r) + ".csv"), sr.traces[r]);
  }

  nlohmann::json fits;
  nlohmann::json costs;
  const ScalingCurve* reference_anchor = nullptr;
  for (const StrategySummary& summary : summaries) {
    const std::string name = to_string(summary.kind);
    write_curve_csv(out_dir / "curves" / (name + ".csv"), summary.curve);
    if (!reference_anchor && !summary.curve.points.empty()) reference_anchor = &summary.curve;

    if (summary.fit) {
      fits[name] = {{"exponent", summary.fit->exponent},
                    {"multiplier", summary.fit->multiplier},
                    {"residual", summary.fit->residual},
                    {"points_used", summary.fit->points_used},
                    {"mean_n_experiments", summary.mean_measurements}};
    } else {
      fits[name] = {{"error", summary.fit_failure},
                    {"mean_n_experiments", summary.mean_measurements}};
    }

    // Cost-model N counts binary outcomes, hence shots rather than trace rows.
    CostModel cm;
    cm.particle_count = result.config.particles;
    const StrategyConfig* scfg = nullptr;
    for (const StrategyResult& sr : result.per_strategy)
      if (sr.strategy.kind == summary.kind) scfg = &sr.strategy;
    cm.controls = scfg ? scfg->candidates_per_iter : 1;
    cm.experiments = std::max<std::int64_t>(1, std::llround(summary.mean_shots));
    nlohmann::json entry{{"K", cm.particle_count},
                         {"M", cm.controls},
                         {"N", cm.experiments},
                         {"mean_shots", summary.mean_shots}};
    if (summary.completed_runs > 0)
      entry["predicted_ops"] = predicted_cost(cm, cost_kind_for(summary.kind));
    else
      entry["predicted_ops"] = nullptr;
    costs[name] = entry;
  }

  if (reference_anchor) {
    const ReferenceLines lines = reference_lines(*reference_anchor);
    write_curve_csv(out_dir / "curves" / "sql.csv", lines.sql);
    write_curve_csv(out_dir / "curves" / "hl.csv", lines.hl);
  }

  nlohmann::json report;
  report["config"] = to_json(result.config);
  report["frequencies"] = result.frequencies;
  nlohmann::json per_strategy;
  for (std::size_t s = 0; s < result.per_strategy.size(); ++s) {
    const StrategyResult& sr = result.per_strategy[s];
    per_strategy[to_string(sr.strategy.kind)] = {
        {"degenerate_runs", sr.degenerate_runs},
        {"completed_runs", summaries[s].completed_runs},
        {"clamped_rms_values", summaries[s].curve.clamped_values}};
  }
  report["per_strategy"] = per_strategy;
  report["failures"] = benchmark_failures(result);

  write_text(out_dir / "fits.json", fits.dump(2) + "\n");
  write_text(out_dir / "costs.json", costs.dump(2) + "\n");
  write_text(out_dir / "report.json", report.dump(2) + "\n");
}

}  // namespace qfe

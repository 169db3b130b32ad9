#include "qfe/simulate.hpp"

#include <cmath>
#include <utility>

namespace qfe {

void validate(const RunConfig& cfg) {
  validate(cfg.strategy);
  validate(cfg.resample);
  if (cfg.particles < 2) throw ConfigError("need at least 2 particles");
  if (!(cfg.cet_budget > 0.0)) throw ConfigError("cet_budget must be positive");
  if (cfg.max_experiments < 1) throw ConfigError("max_experiments must be >= 1");
  if (!(cfg.support.width() > 0.0) || cfg.support.lower < 0.0)
    throw ConfigError("support must satisfy 0 <= lower < upper");
}

std::string to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::BudgetReached: return "budget_reached";
    case TerminalStatus::MaxExperiments: return "max_experiments";
    case TerminalStatus::Degenerate: return "degenerate";
  }
  throw ConfigError("unknown terminal status");
}

ExperimentRecord simulate_measurement(const TrueSystem& system, double time, int shots, Rng& rng) {
  if (shots < 1) throw DomainError("need at least one shot");
  const double p_one = likelihood(system.model, 1, system.omega_true, time);
  int ones = 0;
  for (int s = 0; s < shots; ++s)
    if (uniform_unit(rng) < p_one) ++ones;
  return {time, shots, ones};
}

namespace {

struct RunLoop {
  const TrueSystem& system;
  const RunConfig& cfg;
  Rng rng;
  ParticleEnsemble ensemble;
  DataHistory history;
  RunTrace trace;
  double cet = 0.0;
  bool degenerate = false;

  RunLoop(const TrueSystem& s, const RunConfig& c) : system(s), cfg(c), rng(make_rng(c.seed)) {
    ensemble = init_prior(c.particles, c.support, rng);
    trace.omega_true = s.omega_true;
    trace.seed = c.seed;
  }

  bool exhausted() const {
    return cet >= cfg.cet_budget ||
           static_cast<long long>(trace.steps.size()) >= cfg.max_experiments;
  }

  // One measure/update/resample cycle; false when the posterior degenerates.
  bool measure(double time, int shots) {
    const ExperimentRecord record = simulate_measurement(system, time, shots, rng);
    history.push_back(record);
    try {
      ensemble = bayes_update(ensemble, system.model, record);
    } catch (const DegeneratePosteriorError&) {
      degenerate = true;
      return false;
    }
    ensemble = maybe_resample(ensemble, history, system.model, cfg.resample, cfg.support, rng)
                   .ensemble;
    cet += time * double(shots);
    const MeanStd stat = mean_std(ensemble);
    trace.steps.push_back({cet, time, shots, record.ones, stat.mean, stat.std, ess(ensemble),
                           static_cast<long long>(trace.steps.size()) + 1});
    return true;
  }

  RunTrace finish() {
    if (degenerate)
      trace.status = TerminalStatus::Degenerate;
    else if (cet >= cfg.cet_budget)
      trace.status = TerminalStatus::BudgetReached;
    else
      trace.status = TerminalStatus::MaxExperiments;
    return std::move(trace);
  }
};

RunTrace run_window_search(const TrueSystem& system, const RunConfig& cfg) {
  RunLoop loop(system, cfg);
  for (int i = 0; i < cfg.strategy.warmup_shots && !loop.exhausted(); ++i)
    if (!loop.measure(cfg.strategy.warmup_time, 1)) return loop.finish();
  WindowState window{0.0, cfg.strategy.initial_upper, 0};
  while (!loop.exhausted()) {
    WesChoice choice = wes_choose(loop.ensemble, system.model, window, cfg.strategy, loop.rng);
    window = choice.window;
    if (!loop.measure(choice.time, cfg.strategy.shots_per_measurement)) break;
  }
  return loop.finish();
}

RunTrace run_heuristic(const TrueSystem& system, const RunConfig& cfg) {
  RunLoop loop(system, cfg);
  while (!loop.exhausted()) {
    double time = 0.0;
    try {
      time = cfg.strategy.kind == StrategyKind::Sh
                 ? sh_choose(loop.ensemble, cfg.strategy)
                 : pgh_choose(loop.ensemble, cfg.strategy, loop.rng);
    } catch (const DegenerateDistributionError&) {
      loop.degenerate = true;
      break;
    }
    if (!loop.measure(time, 1)) break;
  }
  return loop.finish();
}

RunTrace run_random_schedule(const TrueSystem& system, const RunConfig& cfg) {
  RunLoop loop(system, cfg);
  // Enough sorted times that the budget, not the schedule, ends a typical run;
  // expected spend per time is cap/2.
  const double cap = cfg.strategy.rts_cap;
  const long long wanted =
      static_cast<long long>(std::ceil(4.0 * cfg.cet_budget / cap)) + 1024;
  const std::vector<double> times =
      rts_schedule(std::min<long long>(cfg.max_experiments, wanted), cap, loop.rng);
  for (std::size_t i = 0; i < times.size() && !loop.exhausted(); ++i)
    if (!loop.measure(times[i], 1)) break;
  return loop.finish();
}

}  // namespace

RunTrace run_estimation(const TrueSystem& system, const RunConfig& cfg) {
  validate(cfg);
  if (!std::isfinite(system.omega_true) || !cfg.support.contains(system.omega_true))
    throw ConfigError("omega_true must lie inside the prior support");
  switch (cfg.strategy.kind) {
    case StrategyKind::Wes:
    case StrategyKind::Awes: return run_window_search(system, cfg);
    case StrategyKind::Sh:
    case StrategyKind::Pgh: return run_heuristic(system, cfg);
    case StrategyKind::Rts: return run_random_schedule(system, cfg);
  }
  throw ConfigError("unknown strategy kind");
}

RunTrace run_estimation_with(const TrueSystem& system, const RunConfig& cfg,
                             const ChooseTime& chooser) {
  validate(cfg);
  if (!std::isfinite(system.omega_true) || !cfg.support.contains(system.omega_true))
    throw ConfigError("omega_true must lie inside the prior support");
  RunLoop loop(system, cfg);
  while (!loop.exhausted()) {
    double time = 0.0;
    try {
      time = chooser(loop.ensemble, loop.rng);
    } catch (const DegenerateDistributionError&) {
      loop.degenerate = true;
      break;
    }
    if (!loop.measure(time, 1)) break;
  }
  return loop.finish();
}

}  // namespace qfe

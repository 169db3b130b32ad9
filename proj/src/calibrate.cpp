#include "qfe/calibrate.hpp"

#include <cmath>
#include <limits>

namespace qfe {

CalibrationOutcome calibrate_multiplier(StrategyKind kind, const LikelihoodModel& model,
                                        int calibration_runs, const std::vector<double>& grid,
                                        const CalibrationSettings& settings) {
  if (kind != StrategyKind::Sh && kind != StrategyKind::Pgh)
    throw ConfigError("only the closed-form heuristics take a multiplier");
  if (grid.empty()) throw ConfigError("calibration grid must not be empty");
  for (double c : grid)
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("grid multipliers must be positive");
  if (grid.size() == 1) return {grid.front(), {{grid.front(), 0.0, 0}}};
  if (calibration_runs < 1) throw ConfigError("need at least one calibration run");

  // One frequency stream shared by all candidates keeps the scores paired.
  Rng freq_rng = make_rng(derive_seed(settings.seed, 0x0f7e9));
  std::vector<double> frequencies(static_cast<std::size_t>(calibration_runs));
  for (auto& f : frequencies)
    f = uniform_open_closed(freq_rng, settings.support.lower, settings.support.upper);

  CalibrationOutcome outcome;
  double best = std::numeric_limits<double>::infinity();
  for (double c : grid) {
    double sum_sq = 0.0;
    int completed = 0;
    for (int r = 0; r < calibration_runs; ++r) {
      RunConfig rc;
      rc.strategy = default_strategy(kind);
      rc.strategy.heuristic_multiplier = c;
      rc.particles = settings.particles;
      rc.resample = settings.resample;
      rc.cet_budget = settings.cet_budget;
      rc.max_experiments = settings.max_experiments;
      rc.support = settings.support;
      rc.seed = derive_seed(settings.seed, static_cast<std::uint64_t>(r) + 1);
      const RunTrace trace = run_estimation({frequencies[r], model}, rc);
      if (trace.status == TerminalStatus::Degenerate || trace.steps.empty()) continue;
      const double err = (trace.steps.back().estimate - frequencies[r]) / frequencies[r];
      sum_sq += err * err;
      ++completed;
    }
    CalibrationScore score{c, std::numeric_limits<double>::infinity(), completed};
    if (completed > 0) score.rmse = std::sqrt(sum_sq / completed);
    outcome.scores.push_back(score);
    if (score.rmse < best) {
      best = score.rmse;
      outcome.selected = c;
    }
  }
  if (!(best < std::numeric_limits<double>::infinity()))
    throw DegenerateDistributionError("every calibration run degenerated for every multiplier");
  return outcome;
}

}  // namespace qfe

#pragma once

#include <cstdint>
#include <vector>

#include "qfe/likelihood.hpp"
#include "qfe/simulate.hpp"
#include "qfe/strategies.hpp"

namespace qfe {

/// Scale of the short estimation runs used to score candidate multipliers.
struct CalibrationSettings {
  double cet_budget = 2000.0;
  int particles = 1000;
  long long max_experiments = 20000;
  ResampleConfig resample{};
  Interval support = frequency_support();
  std::uint64_t seed = 1;
};

struct CalibrationScore {
  double multiplier = 0.0;
  double rmse = 0.0;
  int completed_runs = 0;
};

struct CalibrationOutcome {
  double selected = 0.0;
  std::vector<CalibrationScore> scores;
};

/// Pick the grid value minimizing final relative RMSE over calibration_runs
/// short runs. Runs are paired: every candidate sees the same frequencies and
/// per-run seeds, so the comparison is noise-matched. kind must be a
/// closed-form heuristic (t = c/sigma or the pair-gap rule).
CalibrationOutcome calibrate_multiplier(StrategyKind kind, const LikelihoodModel& model,
                                        int calibration_runs, const std::vector<double>& grid,
                                        const CalibrationSettings& settings = {});

}  // namespace qfe

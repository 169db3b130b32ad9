#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qfe/ensemble.hpp"
#include "qfe/likelihood.hpp"
#include "qfe/rng.hpp"
#include "qfe/smc.hpp"
#include "qfe/strategies.hpp"

namespace qfe {

/// Ground truth used to draw synthetic outcomes. The same model value drives
/// generation and inference, so simulation and estimator never disagree about
/// the physics.
struct TrueSystem {
  double omega_true = 1.0;
  LikelihoodModel model{};
};

struct RunConfig {
  StrategyConfig strategy{};
  int particles = 2000;
  ResampleConfig resample{};
  double cet_budget = 1e4;
  long long max_experiments = 20000;  // measurement count guard, not shots
  std::uint64_t seed = 1;
  Interval support = frequency_support();
};

void validate(const RunConfig& cfg);

enum class TerminalStatus { BudgetReached, MaxExperiments, Degenerate };

std::string to_string(TerminalStatus status);

/// One row per measurement. cet accumulates time * shots across the run.
struct TraceStep {
  double cet = 0.0;
  double t_chosen = 0.0;
  int shots = 0;
  int ones = 0;
  double estimate = 0.0;
  double std_dev = 0.0;
  double ess = 0.0;
  long long n_experiments = 0;
};

struct RunTrace {
  std::vector<TraceStep> steps;
  TerminalStatus status = TerminalStatus::BudgetReached;
  double omega_true = 0.0;
  std::uint64_t seed = 0;
};

/// Binomial draw of `shots` outcomes at the given evolution time.
ExperimentRecord simulate_measurement(const TrueSystem& system, double time, int shots, Rng& rng);

/// Full adaptive estimation run under cfg.strategy, stopping at the budget or
/// the measurement cap. A collapsed posterior or heuristic ends the run with
/// TerminalStatus::Degenerate instead of propagating.
RunTrace run_estimation(const TrueSystem& system, const RunConfig& cfg);

/// chooser(ensemble, rng) -> next evolution time; single shot per measurement,
/// no warmup. Test seam for scripted schedules; a thrown
/// DegenerateDistributionError terminates the run as Degenerate.
using ChooseTime = std::function<double(const ParticleEnsemble&, Rng&)>;
RunTrace run_estimation_with(const TrueSystem& system, const RunConfig& cfg,
                             const ChooseTime& chooser);

}  // namespace qfe

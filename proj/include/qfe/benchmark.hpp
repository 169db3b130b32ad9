#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qfe/simulate.hpp"

namespace qfe {

enum class ErrorNormalization { RelativeToTrue, DomainWidth };

std::string to_string(ErrorNormalization mode);
ErrorNormalization normalization_from_string(const std::string& name);

struct BenchmarkConfig {
  std::vector<StrategyConfig> strategies;
  int n_runs = 20;
  LikelihoodModel model{};
  int particles = 2000;
  ResampleConfig resample{};
  double cet_budget = 1e4;
  long long max_experiments = 20000;
  int bins = 30;
  double fit_window = 0.8;  // fraction of trailing curve points used by the fit
  std::uint64_t master_seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  ErrorNormalization normalization = ErrorNormalization::RelativeToTrue;
  Interval support = frequency_support();
  double failure_fraction_limit = 0.1;
};

void validate(const BenchmarkConfig& cfg);

struct StrategyResult {
  StrategyConfig strategy;
  std::vector<RunTrace> traces;  // index-aligned with BenchmarkResult::frequencies
  std::vector<int> degenerate_runs;
};

struct BenchmarkResult {
  BenchmarkConfig config;
  std::vector<double> frequencies;
  std::vector<StrategyResult> per_strategy;
};

/// All strategies estimate the same per-run frequencies with per-run seeds
/// derived from the master seed, so results are paired across strategies and
/// independent of worker count.
BenchmarkResult run_benchmark(const BenchmarkConfig& cfg);

/// |estimate - omega| / omega, or divided by the support width instead.
double normalized_error(double estimate, double omega_true, ErrorNormalization mode,
                        Interval support);

struct CurvePoint {
  double cet_center = 0.0;
  double rmse = 0.0;
  int run_count = 0;
  long long point_count = 0;
};

struct ScalingCurve {
  std::vector<CurvePoint> points;  // cet_center strictly increasing
  long long clamped_values = 0;
};

/// RMS values below this are clamped before entering the log average, so an
/// exactly-recovered frequency cannot produce a log of zero.
inline constexpr double kRmseClampFloor = 1e-12;

/// Error-vs-cost curve: log-spaced cet bins, per-run RMS error within each
/// bin, geometric mean across runs, geometric bin centers. Bins no run
/// touched are omitted.
ScalingCurve bin_log_average_exp(const std::vector<RunTrace>& traces, int bins,
                                 ErrorNormalization mode, Interval support);

struct FitResult {
  double exponent = 0.0;
  double multiplier = 0.0;
  double residual = 0.0;
  int points_used = 0;
};

/// Least squares on (log10 cet, log10 rmse) over the trailing fit_window
/// fraction of curve points. Throws FitError below 3 usable points.
FitResult fit_loglog(const ScalingCurve& curve, double fit_window);

/// Standard quantum limit (slope -1/2) and Heisenberg limit (slope -1)
/// guide lines anchored at the curve's first point. A single-point curve
/// gets lines spanning three decades from the anchor.
struct ReferenceLines {
  ScalingCurve sql;
  ScalingCurve hl;
};
ReferenceLines reference_lines(const ScalingCurve& curve);

struct ExperimentCount {
  StrategyKind kind = StrategyKind::Wes;
  double mean_measurements = 0.0;  // adaptive iterations, one trace row each
  double mean_shots = 0.0;         // binary outcomes collected
  int completed_runs = 0;
};

std::vector<ExperimentCount> experiment_count_table(const BenchmarkResult& result);

/// Traces that finished without degenerating; curve input for one strategy.
std::vector<RunTrace> completed_traces(const StrategyResult& result);

ScalingCurve strategy_curve(const StrategyResult& result, const BenchmarkConfig& cfg);

/// Human-readable failure diagnostics; nonempty means the benchmark does not
/// meet its own reliability bar (a strategy degenerated too often).
std::vector<std::string> benchmark_failures(const BenchmarkResult& result);

}  // namespace qfe

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qfe/benchmark.hpp"
#include "qfe/simulate.hpp"

namespace qfe {

/// Shortest decimal form that round-trips the exact double.
std::string format_double(double v);

nlohmann::json to_json(const ResampleConfig& cfg);
nlohmann::json to_json(const StrategyConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const BenchmarkConfig& cfg);

/// Everything needed to reproduce and interpret one run.
nlohmann::json run_sidecar(const RunConfig& cfg, const TrueSystem& system, const RunTrace& trace);

void write_text(const std::filesystem::path& path, const std::string& content);
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace);
void write_curve_csv(const std::filesystem::path& path, const ScalingCurve& curve);

/// Per-strategy curve, fit and bookkeeping derived from a finished benchmark.
struct StrategySummary {
  StrategyKind kind = StrategyKind::Wes;
  ScalingCurve curve;
  std::optional<FitResult> fit;
  std::string fit_failure;  // reason when fit is absent
  double mean_measurements = 0.0;
  double mean_shots = 0.0;
  int completed_runs = 0;
  int degenerate_count = 0;
};

std::vector<StrategySummary> summarize(const BenchmarkResult& result);

/// Layout under out_dir:
///   traces/<strategy>/<run_idx>.csv
///   curves/<strategy>.csv, curves/sql.csv, curves/hl.csv
///   fits.json, costs.json, report.json
/// Content is a pure function of the benchmark result, byte for byte.
void write_benchmark_outputs(const std::filesystem::path& out_dir, const BenchmarkResult& result,
                             const std::vector<StrategySummary>& summaries);

}  // namespace qfe

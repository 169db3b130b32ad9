#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qfe/errors.hpp"

namespace qfe {

/// Closed-form computational cost of an estimation run, in units of scalar
/// likelihood operations. K particles, M candidate controls per optimization,
/// N binary-outcome experiments.
struct CostModel {
  std::int64_t particle_count = 1;  // K
  std::int64_t controls = 1;        // M
  std::int64_t experiments = 1;     // N

  /// Reweighting the ensemble by one outcome.
  std::int64_t update_cost() const { return particle_count; }
  /// One weighted integral over the ensemble (three passes).
  std::int64_t integral_cost() const { return 3 * particle_count; }
};

void validate(const CostModel& model);

enum class CostKind {
  NonOptimized,  // run the updates only
  Global,        // exhaustive policy over all length-N control sequences
  Greedy,        // per-step exhaustive over M controls
  WindowSearch,        // 50 sampled candidates, 10 shots per optimization
  WindowSearchEss,     // same search loop, ESS-matching objective
  SigmaHeuristic,      // one moment integral per step
  PairGapHeuristic,    // two draws per step, no integral
  RandomSchedule       // presampled times, updates only
};

std::string to_string(CostKind kind);
const std::vector<CostKind>& all_cost_kinds();

/// Total operations for the given procedure. Composed from update_cost and
/// integral_cost; throws ConfigError when the exact value overflows 64 bits.
std::int64_t predicted_cost(const CostModel& model, CostKind kind);

std::vector<std::pair<CostKind, std::int64_t>> cost_table(const CostModel& model);

}  // namespace qfe

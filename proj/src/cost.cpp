#include "qfe/cost.hpp"

#include <limits>

namespace qfe {

void validate(const CostModel& model) {
  if (model.particle_count < 1 || model.controls < 1 || model.experiments < 1)
    throw ConfigError("cost model needs K, M, N >= 1");
}

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::NonOptimized: return "non-optimized";
    case CostKind::Global: return "global";
    case CostKind::Greedy: return "greedy";
    case CostKind::WindowSearch: return "wes";
    case CostKind::WindowSearchEss: return "awes";
    case CostKind::SigmaHeuristic: return "sh";
    case CostKind::PairGapHeuristic: return "pgh";
    case CostKind::RandomSchedule: return "rts";
  }
  throw ConfigError("unknown cost kind");
}

const std::vector<CostKind>& all_cost_kinds() {
  static const std::vector<CostKind> kinds = {
      CostKind::NonOptimized, CostKind::Global,         CostKind::Greedy,
      CostKind::WindowSearch, CostKind::WindowSearchEss, CostKind::SigmaHeuristic,
      CostKind::PairGapHeuristic, CostKind::RandomSchedule};
  return kinds;
}

namespace {

using Wide = unsigned __int128;

[[noreturn]] void overflow() { throw ConfigError("predicted cost exceeds the 64-bit range"); }

Wide checked_mul(Wide a, Wide b) {
  if (a != 0 && b > ~Wide(0) / a) overflow();
  return a * b;
}

Wide checked_add(Wide a, Wide b) {
  if (~Wide(0) - a < b) overflow();
  return a + b;
}

Wide pow2(std::int64_t n) {
  if (n >= 127) overflow();
  return Wide(1) << n;
}

std::int64_t narrow(Wide v) {
  if (v > static_cast<Wide>(std::numeric_limits<std::int64_t>::max())) overflow();
  return static_cast<std::int64_t>(v);
}

// One lookahead scenario: conditional utility (update + integral) plus the
// scenario's marginal probability (another integral).
Wide scenario_cost(const CostModel& m) {
  return static_cast<Wide>(m.update_cost()) + 2 * static_cast<Wide>(m.integral_cost());
}

constexpr std::int64_t kSearchCandidates = 50;
constexpr std::int64_t kSearchShots = 10;  // shots amortizing each candidate search

}  // namespace

std::int64_t predicted_cost(const CostModel& model, CostKind kind) {
  validate(model);
  const Wide K = static_cast<Wide>(model.particle_count);
  const Wide M = static_cast<Wide>(model.controls);
  const Wide N = static_cast<Wide>(model.experiments);
  const Wide update = static_cast<Wide>(model.update_cost());
  const Wide integral = static_cast<Wide>(model.integral_cost());
  const Wide scenario = scenario_cost(model);
  (void)K;

  switch (kind) {
    case CostKind::NonOptimized:
    case CostKind::PairGapHeuristic:
    case CostKind::RandomSchedule:
      return narrow(checked_mul(N, update));
    case CostKind::Global: {
      // Every control, every length-N outcome sequence, plus the N updates of
      // the selected policy.
      const Wide policy = checked_mul(checked_mul(M, pow2(model.experiments)), scenario);
      return narrow(checked_add(policy, checked_mul(N, update)));
    }
    case CostKind::Greedy: {
      const Wide per_step = checked_add(checked_mul(2 * M, scenario), update);
      return narrow(checked_mul(N, per_step));
    }
    case CostKind::WindowSearch:
    case CostKind::WindowSearchEss: {
      // Candidate search every kSearchShots outcomes; both scenarios per
      // candidate. 2 * 50 * 7K / 10 is exactly 70K for any K.
      const Wide search = checked_mul(Wide(2 * kSearchCandidates), scenario) / Wide(kSearchShots);
      return narrow(checked_mul(N, checked_add(search, update)));
    }
    case CostKind::SigmaHeuristic:
      return narrow(checked_mul(N, checked_add(update, integral)));
  }
  throw ConfigError("unknown cost kind");
}

std::vector<std::pair<CostKind, std::int64_t>> cost_table(const CostModel& model) {
  std::vector<std::pair<CostKind, std::int64_t>> table;
  for (CostKind kind : all_cost_kinds()) table.emplace_back(kind, predicted_cost(model, kind));
  return table;
}

}  // namespace qfe

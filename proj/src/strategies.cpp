#include "qfe/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "qfe/opcount.hpp"

namespace qfe {

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Wes: return "wes";
    case StrategyKind::Awes: return "awes";
    case StrategyKind::Sh: return "sh";
    case StrategyKind::Pgh: return "pgh";
    case StrategyKind::Rts: return "rts";
  }
  throw ConfigError("unknown strategy kind");
}

StrategyKind strategy_kind_from_string(const std::string& name) {
  if (name == "wes") return StrategyKind::Wes;
  if (name == "awes") return StrategyKind::Awes;
  if (name == "sh") return StrategyKind::Sh;
  if (name == "pgh") return StrategyKind::Pgh;
  if (name == "rts") return StrategyKind::Rts;
  throw ConfigError("unknown strategy '" + name + "' (expected wes, awes, sh, pgh or rts)");
}

void validate(const StrategyConfig& cfg) {
  if (cfg.candidates_per_iter < 1) throw ConfigError("candidates_per_iter must be >= 1");
  if (cfg.hit_rank < 1 || cfg.hit_rank > cfg.candidates_per_iter)
    throw ConfigError("hit_rank must lie in [1, candidates_per_iter]");
  if (cfg.hits_to_expand < 1) throw ConfigError("hits_to_expand must be >= 1");
  if (cfg.warmup_shots < 0) throw ConfigError("warmup_shots must be nonnegative");
  if (!(cfg.warmup_time > 0.0)) throw ConfigError("warmup_time must be positive");
  if (!(cfg.initial_upper > 0.0) || cfg.initial_upper > kMaxWindowUpper)
    throw ConfigError("initial_upper must lie in (0, 1e12]");
  if (cfg.shots_per_measurement < 1) throw ConfigError("shots_per_measurement must be >= 1");
  if (!(cfg.ess_target_fraction > 0.0) || cfg.ess_target_fraction > 1.0)
    throw ConfigError("ess_target_fraction must lie in (0, 1]");
  if (!(cfg.heuristic_multiplier > 0.0)) throw ConfigError("heuristic_multiplier must be positive");
  if (!(cfg.rts_cap > 0.0)) throw ConfigError("rts_cap must be positive");
}

StrategyConfig default_strategy(StrategyKind kind) {
  StrategyConfig cfg;
  cfg.kind = kind;
  return cfg;
}

WindowState register_hit(const WindowState& window, bool hit, const StrategyConfig& cfg) {
  if (!(window.upper > window.lower)) throw ConfigError("window must have positive width");
  WindowState next = window;
  if (!hit) return next;
  next.hits += 1;
  if (next.hits < cfg.hits_to_expand) return next;
  const double doubled = std::min(2.0 * window.upper, kMaxWindowUpper);
  if (doubled <= window.upper) {
    // Already saturated; stay put and start a fresh count.
    std::cerr << "window expansion capped at " << kMaxWindowUpper << " time units\n";
    next.hits = 0;
    return next;
  }
  if (doubled == kMaxWindowUpper && 2.0 * window.upper > kMaxWindowUpper)
    std::cerr << "window expansion capped at " << kMaxWindowUpper << " time units\n";
  return {window.upper, doubled, 0};
}

namespace {

struct BranchMasses {
  Eigen::ArrayXd zero;
  Eigen::ArrayXd one;
  double p_zero = 0.0;
  double p_one = 0.0;
};

BranchMasses outcome_masses(const ParticleEnsemble& ensemble, const LikelihoodModel& model,
                            double t) {
  const OutcomeProbs probs = outcome_probs(model, ensemble.locations, t);
  BranchMasses b;
  b.zero = ensemble.weights * probs.zero;
  b.one = ensemble.weights * probs.one;
  b.p_zero = b.zero.sum();
  b.p_one = b.one.sum();
  opcount::counters().weight_products += 2 * ensemble.size();
  return b;
}

}  // namespace

double expected_variance_utility(const ParticleEnsemble& ensemble, const LikelihoodModel& model,
                                 double t) {
  const BranchMasses b = outcome_masses(ensemble, model, t);
  const double total = b.p_zero + b.p_one;
  if (!(total > 0.0)) throw DegeneratePosteriorError("outcome probabilities vanished");
  double expected = 0.0;
  if (b.p_zero > 0.0)
    expected += (b.p_zero / total) * weighted_moments(ensemble.locations, b.zero).variance;
  if (b.p_one > 0.0)
    expected += (b.p_one / total) * weighted_moments(ensemble.locations, b.one).variance;
  return -expected;
}

double expected_ess_utility(const ParticleEnsemble& ensemble, const LikelihoodModel& model,
                            double t, double target_fraction) {
  const BranchMasses b = outcome_masses(ensemble, model, t);
  const double total = b.p_zero + b.p_one;
  if (!(total > 0.0)) throw DegeneratePosteriorError("outcome probabilities vanished");
  auto branch_ess = [](const Eigen::ArrayXd& mass, double p) {
    return p * p / mass.square().sum();
  };
  double expected = 0.0;
  if (b.p_zero > 0.0) expected += (b.p_zero / total) * branch_ess(b.zero, b.p_zero);
  if (b.p_one > 0.0) expected += (b.p_one / total) * branch_ess(b.one, b.p_one);
  opcount::counters().integrals += 2;
  opcount::counters().integral_ops += 4 * ensemble.size();
  return -std::abs(expected - target_fraction * double(ensemble.size()));
}

WesChoice wes_choose_with(const WindowState& window, const StrategyConfig& cfg, Rng& rng,
                          const std::function<double(double)>& utility) {
  validate(cfg);
  if (!(window.upper > window.lower) || window.lower < 0.0)
    throw ConfigError("window must satisfy 0 <= lower < upper");
  const int m = cfg.candidates_per_iter;
  std::vector<CandidateEvaluation> evals(m);
  // Draw every candidate before scoring so the rng stream does not depend on
  // the scorer.
  for (auto& e : evals) e.time = uniform_open_closed(rng, window.lower, window.upper);
  for (auto& e : evals) e.utility = utility(e.time);

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (evals[a].time != evals[b].time) return evals[a].time > evals[b].time;
    return a < b;
  });
  for (int r = 0; r < m; ++r) evals[order[r]].time_rank_desc = r + 1;

  int best = 0;
  for (int i = 1; i < m; ++i) {
    if (evals[i].utility > evals[best].utility ||
        (evals[i].utility == evals[best].utility && evals[i].time < evals[best].time))
      best = i;
  }
  const bool hit = evals[best].time_rank_desc <= cfg.hit_rank;
  return {evals[best].time, register_hit(window, hit, cfg), std::move(evals)};
}

WesChoice wes_choose(const ParticleEnsemble& ensemble, const LikelihoodModel& model,
                     const WindowState& window, const StrategyConfig& cfg, Rng& rng) {
  if (cfg.kind != StrategyKind::Wes && cfg.kind != StrategyKind::Awes)
    throw ConfigError("wes_choose needs a window-search strategy config");
  auto scorer = [&](double t) {
    return cfg.kind == StrategyKind::Awes
               ? expected_ess_utility(ensemble, model, t, cfg.ess_target_fraction)
               : expected_variance_utility(ensemble, model, t);
  };
  return wes_choose_with(window, cfg, rng, scorer);
}

double sh_choose(const ParticleEnsemble& ensemble, const StrategyConfig& cfg) {
  const double sigma = mean_std(ensemble).std;
  if (!(sigma > 0.0))
    throw DegenerateDistributionError("posterior spread collapsed; t = c/sigma is undefined");
  return cfg.heuristic_multiplier / sigma;
}

namespace {

Eigen::Index sample_index_by_weight(const Eigen::ArrayXd& weights, Rng& rng) {
  const Eigen::Index n = weights.size();
  const double target = uniform_unit(rng) * weights.sum();
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cumulative += weights[i];
    if (target < cumulative) return i;
  }
  return n - 1;
}

}  // namespace

double pgh_choose(const ParticleEnsemble& ensemble, const StrategyConfig& cfg, Rng& rng) {
  if (ensemble.size() < 2)
    throw DegenerateDistributionError("need at least two particles for a pair draw");
  constexpr int kMaxRedraws = 50;
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    const Eigen::Index a = sample_index_by_weight(ensemble.weights, rng);
    const Eigen::Index b = sample_index_by_weight(ensemble.weights, rng);
    const double gap = std::abs(ensemble.locations[a] - ensemble.locations[b]);
    if (gap > 0.0) return cfg.heuristic_multiplier / gap;
  }
  throw DegenerateDistributionError("pair draws kept coinciding; posterior has collapsed");
}

std::vector<double> rts_schedule(long long n, double cap, Rng& rng) {
  if (n < 1) throw ConfigError("schedule needs at least one time");
  if (!(cap > 0.0)) throw ConfigError("schedule cap must be positive");
  std::vector<double> times(static_cast<std::size_t>(n));
  for (auto& t : times) t = uniform_open_closed(rng, 0.0, cap);
  std::sort(times.begin(), times.end());
  return times;
}

}  // namespace qfe

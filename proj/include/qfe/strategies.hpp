#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qfe/ensemble.hpp"
#include "qfe/likelihood.hpp"
#include "qfe/rng.hpp"

namespace qfe {

enum class StrategyKind { Wes, Awes, Sh, Pgh, Rts };

std::string to_string(StrategyKind kind);
StrategyKind strategy_kind_from_string(const std::string& name);

/// Window expansion stops doubling at this evolution time.
inline constexpr double kMaxWindowUpper = 1e12;

/// Knobs for every strategy family; each field is read only by the strategies
/// it belongs to.
struct StrategyConfig {
  StrategyKind kind = StrategyKind::Wes;

  // window-search strategies
  int candidates_per_iter = 50;
  int hit_rank = 3;        // chosen time must rank in the top hit_rank largest to count as a hit
  int hits_to_expand = 3;  // consecutive-counter threshold before the window moves up
  int warmup_shots = 10;
  double warmup_time = 1.0;
  double initial_upper = 100.0;
  int shots_per_measurement = 10;
  double ess_target_fraction = 0.5;  // ESS-matching variant only

  // closed-form heuristics
  double heuristic_multiplier = 1.0;

  // random time sampling
  double rts_cap = 100.0;
};

void validate(const StrategyConfig& cfg);

StrategyConfig default_strategy(StrategyKind kind);

/// Search window (lower, upper] with a hit counter toward the next expansion.
struct WindowState {
  double lower = 0.0;
  double upper = 100.0;
  int hits = 0;
};

/// Window bookkeeping for one iteration's hit/no-hit outcome. On the
/// hits_to_expand-th hit the window moves to (upper, 2*upper] and the counter
/// resets; the upper edge saturates at kMaxWindowUpper with a diagnostic.
WindowState register_hit(const WindowState& window, bool hit, const StrategyConfig& cfg);

/// Negative posterior variance expected over the two outcomes of a single
/// shot at time t. Branch probabilities are renormalized by their sum, so a
/// zero-information time scores exactly minus the current variance.
double expected_variance_utility(const ParticleEnsemble& ensemble, const LikelihoodModel& model,
                                 double t);

/// Negative distance between the expected post-update ESS and
/// target_fraction * K, under the same single-shot lookahead.
double expected_ess_utility(const ParticleEnsemble& ensemble, const LikelihoodModel& model,
                            double t, double target_fraction);

struct CandidateEvaluation {
  double time = 0.0;
  double utility = 0.0;
  int time_rank_desc = 0;  // 1 = largest candidate time
};

struct WesChoice {
  double time = 0.0;
  WindowState window;
  std::vector<CandidateEvaluation> evaluations;
};

/// One window-search iteration: sample candidates uniformly from the window,
/// score them, pick the argmax (ties to the smaller time), update the window.
WesChoice wes_choose(const ParticleEnsemble& ensemble, const LikelihoodModel& model,
                     const WindowState& window, const StrategyConfig& cfg, Rng& rng);

/// wes_choose with an injected scorer; the production scorer is chosen by
/// cfg.kind. Exposed so the selection and window mechanics can be tested with
/// scripted utilities.
WesChoice wes_choose_with(const WindowState& window, const StrategyConfig& cfg, Rng& rng,
                          const std::function<double(double)>& utility);

/// t = c / sigma. Throws DegenerateDistributionError when the posterior has
/// collapsed (sigma == 0).
double sh_choose(const ParticleEnsemble& ensemble, const StrategyConfig& cfg);

/// t = c / |omega_a - omega_b| for two weight-proportional draws, redrawing
/// on coincident locations up to 50 times.
double pgh_choose(const ParticleEnsemble& ensemble, const StrategyConfig& cfg, Rng& rng);

/// n times uniform on (0, cap], sorted ascending.
std::vector<double> rts_schedule(long long n, double cap, Rng& rng);

}  // namespace qfe

#include "qfe/smc.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "qfe/opcount.hpp"

namespace qfe {

void validate(const ResampleConfig& cfg) {
  if (!(cfg.ess_threshold_fraction > 0.0) || cfg.ess_threshold_fraction > 1.0)
    throw ConfigError("ess threshold fraction must lie in (0, 1]");
  if (cfg.mh_steps < 0) throw ConfigError("mh_steps must be nonnegative");
  if (!(cfg.proposal_scale > 0.0)) throw ConfigError("proposal_scale must be positive");
}

ParticleEnsemble init_prior(Eigen::Index particle_count, Interval support, Rng& rng) {
  if (particle_count < 2) throw ConfigError("need at least 2 particles");
  if (!(support.width() > 0.0)) throw ConfigError("prior support must have positive width");
  ParticleEnsemble e;
  e.locations.resize(particle_count);
  for (Eigen::Index k = 0; k < particle_count; ++k)
    e.locations[k] = uniform_open_closed(rng, support.lower, support.upper);
  e.weights = Eigen::ArrayXd::Constant(particle_count, 1.0 / double(particle_count));
  return e;
}

ParticleEnsemble bayes_update(const ParticleEnsemble& ensemble, const LikelihoodModel& model,
                              const ExperimentRecord& record) {
  if (ensemble.size() == 0) throw ConfigError("cannot update an empty ensemble");
  const Eigen::ArrayXd ll = record_log_likelihood(model, ensemble.locations, record);
  const double max_ll = ll.maxCoeff();
  if (!(max_ll > -std::numeric_limits<double>::infinity()))
    throw DegeneratePosteriorError("observed record has zero likelihood under every particle");
  // Constant likelihood carries no information; keep the weights bit-identical.
  if (ll.minCoeff() == max_ll) return ensemble;
  Eigen::ArrayXd reweighted = ensemble.weights * (ll - max_ll).exp();
  const double total = reweighted.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw DegeneratePosteriorError("posterior weights vanished after update");
  auto& c = opcount::counters();
  c.bayes_updates += 1;
  c.weight_products += ensemble.size();
  return {ensemble.locations, reweighted / total};
}

Eigen::ArrayXd systematic_resample_locations(const ParticleEnsemble& ensemble, Rng& rng) {
  const Eigen::Index n = ensemble.size();
  if (n == 0) throw ConfigError("cannot resample an empty ensemble");
  const double total = ensemble.weights.sum();
  if (!(total > 0.0)) throw DegeneratePosteriorError("cannot resample zero total weight");
  const double step = total / double(n);
  double position = uniform_unit(rng) * step;
  Eigen::ArrayXd out(n);
  Eigen::Index i = 0;
  double cumulative = ensemble.weights[0];
  for (Eigen::Index j = 0; j < n; ++j) {
    while (position > cumulative && i + 1 < n) {
      ++i;
      cumulative += ensemble.weights[i];
    }
    out[j] = ensemble.locations[i];
    position += step;
  }
  return out;
}

ResampleOutcome maybe_resample(const ParticleEnsemble& ensemble, const DataHistory& history,
                               const LikelihoodModel& model, const ResampleConfig& cfg,
                               Interval support, Rng& rng) {
  validate(cfg);
  const Eigen::Index n = ensemble.size();
  if (ess(ensemble) >= cfg.ess_threshold_fraction * double(n)) return {ensemble, false, false};

  const double sigma = std::sqrt(weighted_moments(ensemble.locations, ensemble.weights).variance);
  ParticleEnsemble out{systematic_resample_locations(ensemble, rng),
                       Eigen::ArrayXd::Constant(n, 1.0 / double(n))};
  if (sigma == 0.0 || cfg.mh_steps == 0) return {std::move(out), true, sigma == 0.0};

  const double width = cfg.proposal_scale * sigma;
  std::normal_distribution<double> offset(0.0, width);
  Eigen::ArrayXd current_ll = history_log_likelihood(model, out.locations, history);
  for (int step = 0; step < cfg.mh_steps; ++step) {
    Eigen::ArrayXd proposed(n);
    for (Eigen::Index k = 0; k < n; ++k) proposed[k] = out.locations[k] + offset(rng);
    const Eigen::ArrayXd proposed_ll = history_log_likelihood(model, proposed, history);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!support.contains(proposed[k])) continue;  // flat prior is zero outside
      const double log_ratio = proposed_ll[k] - current_ll[k];
      if (log_ratio < 0.0 && !(std::log(uniform_unit(rng)) < log_ratio)) continue;
      out.locations[k] = proposed[k];
      current_ll[k] = proposed_ll[k];
    }
  }
  return {std::move(out), true, false};
}

}  // namespace qfe

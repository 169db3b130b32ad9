#pragma once

#include <Eigen/Core>

#include "qfe/ensemble.hpp"
#include "qfe/likelihood.hpp"
#include "qfe/rng.hpp"

namespace qfe {

/// Resample-move settings. The move step is a short Metropolis walk whose
/// target is the full-history posterior, so resampling leaves the represented
/// distribution unchanged up to Monte Carlo error.
struct ResampleConfig {
  double ess_threshold_fraction = 0.5;  // resample when ESS < fraction * K
  int mh_steps = 2;
  double proposal_scale = 0.1;  // proposal std as a multiple of the ensemble std
};

void validate(const ResampleConfig& cfg);

/// Equal-weight draw from the flat prior on (support.lower, support.upper].
ParticleEnsemble init_prior(Eigen::Index particle_count, Interval support, Rng& rng);

/// Posterior reweighting by one record. Weights stay bit-identical when the
/// record carries no information (constant likelihood across particles).
/// Throws DegeneratePosteriorError when every particle has zero likelihood.
ParticleEnsemble bayes_update(const ParticleEnsemble& ensemble, const LikelihoodModel& model,
                              const ExperimentRecord& record);

/// Low-variance systematic resampling: one uniform offset, K evenly spaced
/// selection points through the cumulative weights.
Eigen::ArrayXd systematic_resample_locations(const ParticleEnsemble& ensemble, Rng& rng);

struct ResampleOutcome {
  ParticleEnsemble ensemble;
  bool resampled = false;
  bool zero_spread = false;  // ensemble had collapsed; move step was skipped
};

/// Resample-move when ESS drops below threshold, otherwise pass through
/// untouched. The Metropolis target is flat-prior x history likelihood, with
/// proposals rejected outside the support.
ResampleOutcome maybe_resample(const ParticleEnsemble& ensemble, const DataHistory& history,
                               const LikelihoodModel& model, const ResampleConfig& cfg,
                               Interval support, Rng& rng);

}  // namespace qfe

#pragma once

#include <Eigen/Core>
#include <cmath>

#include "qfe/errors.hpp"
#include "qfe/likelihood.hpp"
#include "qfe/opcount.hpp"

namespace qfe {

struct Interval {
  double lower = 0.0;
  double upper = 1.0;

  double width() const { return upper - lower; }
  /// Membership in the half-open interval (lower, upper].
  bool contains(double v) const { return v > lower && v <= upper; }
};

/// Prior support for the precession frequency.
inline Interval frequency_support() { return {0.0, kHalfPi}; }

/// Weighted particle approximation of the frequency posterior.
/// Invariant between updates: weights nonnegative, summing to 1.
struct ParticleEnsemble {
  Eigen::ArrayXd locations;
  Eigen::ArrayXd weights;

  Eigen::Index size() const { return locations.size(); }
};

struct WeightedMoments {
  double mean = 0.0;
  double variance = 0.0;
  double total = 0.0;
};

/// First two moments under an unnormalized weighting. total <= 0 yields zeros;
/// callers decide whether that case is an error.
inline WeightedMoments weighted_moments(const Eigen::ArrayXd& locations,
                                        const Eigen::ArrayXd& weights) {
  WeightedMoments m;
  m.total = weights.sum();
  if (!(m.total > 0.0)) return m;
  m.mean = (weights * locations).sum() / m.total;
  m.variance = (weights * (locations - m.mean).square()).sum() / m.total;
  auto& c = opcount::counters();
  c.integrals += 2;
  c.integral_ops += 6 * locations.size();
  return m;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(const ParticleEnsemble& e) {
  const WeightedMoments m = weighted_moments(e.locations, e.weights);
  return {m.mean, std::sqrt(m.variance)};
}

/// Effective sample size (sum w)^2 / sum w^2. Equals the particle count for
/// uniform weights and 1 for a one-hot ensemble.
inline double ess(const ParticleEnsemble& e) {
  const double s = e.weights.sum();
  const double q = e.weights.square().sum();
  if (!(q > 0.0)) return 0.0;
  return s * s / q;
}

}  // namespace qfe

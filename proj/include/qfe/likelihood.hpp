#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <vector>

#include "qfe/errors.hpp"

namespace qfe {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kHalfPi = kPi / 2.0;

// Products omega*t above this get an extended-precision phase reduction
// before the trig call; below it, plain double keeps the phase to ~1e-8 rad.
inline constexpr double kPhaseReductionThreshold = 1e8;

/// Two-outcome measurement model of a precessing two-level system.
/// With coherence_time set, visibility decays as exp(-t/T) toward the
/// maximally mixed outcome distribution.
struct LikelihoodModel {
  std::optional<double> coherence_time{};

  static LikelihoodModel ideal() { return {}; }
  static LikelihoodModel damped(double coherence_time) {
    if (!std::isfinite(coherence_time) || coherence_time <= 0.0)
      throw ConfigError("coherence time must be finite and positive");
    return LikelihoodModel{coherence_time};
  }
  bool noisy() const { return coherence_time.has_value(); }
};

/// theta = omega*t/2, reduced mod 2*pi in long double once the product is
/// large enough that double arithmetic would lose the phase entirely.
template <class Scalar>
Scalar half_phase(Scalar omega, Scalar t) {
  const Scalar product = omega * t;
  if (product > Scalar(kPhaseReductionThreshold)) {
    constexpr long double two_pi = 2.0L * 3.141592653589793238462643383279502884L;
    long double p = static_cast<long double>(omega) * static_cast<long double>(t);
    p = std::fmod(p, two_pi);
    return static_cast<Scalar>(0.5L * p);
  }
  return Scalar(0.5) * product;
}

namespace detail {
inline double visibility(const LikelihoodModel& model, double t) {
  return model.coherence_time ? std::exp(-t / *model.coherence_time) : 1.0;
}
inline double damp(double p, double v) { return v * p + 0.5 * (1.0 - v); }
}  // namespace detail

/// P(x=0 | omega; t) = cos^2(omega t / 2), damped toward 1/2 under finite coherence.
inline double prob_zero(const LikelihoodModel& model, double omega, double t) {
  const double c = std::cos(half_phase(omega, t));
  return detail::damp(c * c, detail::visibility(model, t));
}

/// P(x=1 | omega; t) = sin^2(omega t / 2), damped toward 1/2 under finite coherence.
inline double prob_one(const LikelihoodModel& model, double omega, double t) {
  const double s = std::sin(half_phase(omega, t));
  return detail::damp(s * s, detail::visibility(model, t));
}

/// Validated single-outcome likelihood, outcome in {0, 1}.
inline double likelihood(const LikelihoodModel& model, int outcome, double omega, double t) {
  if (outcome != 0 && outcome != 1) throw DomainError("outcome must be 0 or 1");
  if (!std::isfinite(omega) || !std::isfinite(t))
    throw DomainError("likelihood arguments must be finite");
  if (omega < 0.0 || t < 0.0) throw DomainError("likelihood needs omega >= 0 and t >= 0");
  return outcome == 0 ? prob_zero(model, omega, t) : prob_one(model, omega, t);
}

/// Both outcome probabilities per particle. sin^2 and cos^2 are evaluated
/// separately (never as 1 - p) so near-deterministic outcomes keep relative
/// precision.
struct OutcomeProbs {
  Eigen::ArrayXd zero;
  Eigen::ArrayXd one;
};

template <class Derived>
OutcomeProbs outcome_probs(const LikelihoodModel& model, const Eigen::ArrayBase<Derived>& omegas,
                           double t) {
  OutcomeProbs probs;
  const Eigen::Index n = omegas.size();
  if (n == 0) return probs;
  if (t * omegas.maxCoeff() <= kPhaseReductionThreshold) {
    const Eigen::ArrayXd theta = 0.5 * t * omegas;
    probs.zero = theta.cos().square();
    probs.one = theta.sin().square();
  } else {
    const Eigen::ArrayXd om = omegas;
    probs.zero.resize(n);
    probs.one.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double theta = half_phase(om[k], t);
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      probs.zero[k] = c * c;
      probs.one[k] = s * s;
    }
  }
  const double v = detail::visibility(model, t);
  if (v != 1.0) {
    probs.zero = v * probs.zero + 0.5 * (1.0 - v);
    probs.one = v * probs.one + 0.5 * (1.0 - v);
  }
  return probs;
}

template <class Derived>
Eigen::ArrayXd prob_zero(const LikelihoodModel& model, const Eigen::ArrayBase<Derived>& omegas,
                         double t) {
  return outcome_probs(model, omegas, t).zero;
}

/// One batched measurement setting: `shots` repetitions at evolution time
/// `time`, of which `ones` came out excited.
struct ExperimentRecord {
  double time = 0.0;
  int shots = 1;
  int ones = 0;
};

using DataHistory = std::vector<ExperimentRecord>;

inline void validate(const ExperimentRecord& r) {
  if (!std::isfinite(r.time) || r.time < 0.0)
    throw DomainError("record time must be finite and nonnegative");
  if (r.shots < 1) throw DomainError("record needs at least one shot");
  if (r.ones < 0 || r.ones > r.shots) throw DomainError("record ones must lie in [0, shots]");
}

/// Binomial log-likelihood of a record at a single frequency. -inf when the
/// observed outcome is impossible there.
inline double log_likelihood_of_record(const LikelihoodModel& model, double omega,
                                       const ExperimentRecord& record) {
  validate(record);
  if (!std::isfinite(omega) || omega < 0.0)
    throw DomainError("log-likelihood needs finite omega >= 0");
  const int zeros = record.shots - record.ones;
  double ll = 0.0;
  if (zeros > 0) ll += zeros * std::log(prob_zero(model, omega, record.time));
  if (record.ones > 0) ll += record.ones * std::log(prob_one(model, omega, record.time));
  return ll;
}

template <class Derived>
Eigen::ArrayXd record_log_likelihood(const LikelihoodModel& model,
                                     const Eigen::ArrayBase<Derived>& omegas,
                                     const ExperimentRecord& record) {
  validate(record);
  const OutcomeProbs probs = outcome_probs(model, omegas, record.time);
  Eigen::ArrayXd ll = Eigen::ArrayXd::Zero(omegas.size());
  const int zeros = record.shots - record.ones;
  if (zeros > 0) ll += double(zeros) * probs.zero.log();
  if (record.ones > 0) ll += double(record.ones) * probs.one.log();
  return ll;
}

/// Sum of record log-likelihoods over a whole run history.
template <class Derived>
Eigen::ArrayXd history_log_likelihood(const LikelihoodModel& model,
                                      const Eigen::ArrayBase<Derived>& omegas,
                                      const DataHistory& history) {
  Eigen::ArrayXd total = Eigen::ArrayXd::Zero(omegas.size());
  for (const ExperimentRecord& record : history)
    total += record_log_likelihood(model, omegas, record);
  return total;
}

}  // namespace qfe

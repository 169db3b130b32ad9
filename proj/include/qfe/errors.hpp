#pragma once

#include <stdexcept>
#include <string>

namespace qfe {

/// Invalid configuration or CLI input.
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Observed data has zero likelihood under every particle.
struct DegeneratePosteriorError : std::runtime_error {
  explicit DegeneratePosteriorError(const std::string& what) : std::runtime_error(what) {}
};

/// A sampling-based heuristic cannot make progress (collapsed distribution).
struct DegenerateDistributionError : std::runtime_error {
  explicit DegenerateDistributionError(const std::string& what) : std::runtime_error(what) {}
};

/// Not enough well-conditioned data for a regression.
struct FitError : std::runtime_error {
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qfe

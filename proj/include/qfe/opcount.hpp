#pragma once

#include <cstdint>

namespace qfe::opcount {

// Coarse operation tallies for sanity-checking the closed-form cost model
// against what the engine actually does. Counts are per thread.
struct Counters {
  std::int64_t bayes_updates = 0;
  std::int64_t weight_products = 0;  // particle-wise multiply-accumulate in updates
  std::int64_t integrals = 0;        // weighted-moment style reductions
  std::int64_t integral_ops = 0;     // ~3 passes over the ensemble per integral
};

inline Counters& counters() {
  thread_local Counters c;
  return c;
}

inline void reset() { counters() = Counters{}; }

}  // namespace qfe::opcount

#include <doctest.h>

#include <cstdint>

#include "qfe/cost.hpp"
#include "qfe/opcount.hpp"
#include "qfe/rng.hpp"
#include "qfe/simulate.hpp"

using namespace qfe;

TEST_CASE("per-step building blocks compose the scenario cost") {
  Rng rng = make_rng(61);
  for (int rep = 0; rep < 20; ++rep) {
    const std::int64_t k = 1 + std::int64_t(rng() % 100000);
    const CostModel m{k, 1, 1};
    CHECK(m.update_cost() == k);
    CHECK(m.integral_cost() == 3 * k);
    CHECK(m.update_cost() + 2 * m.integral_cost() == 7 * k);
  }
}

TEST_CASE("predicted cost matches the worked examples") {
  // adaptive-step examples at K=1000, N=100 single-shot experiments, M=50
  const CostModel m{1000, 50, 100};
  CHECK(predicted_cost(m, CostKind::SigmaHeuristic) == 400000);
  CHECK(predicted_cost(m, CostKind::WindowSearch) == 7100000);
  CHECK(predicted_cost(m, CostKind::WindowSearchEss) == 7100000);
  CHECK(predicted_cost(m, CostKind::PairGapHeuristic) == 100000);
  CHECK(predicted_cost(m, CostKind::RandomSchedule) == 100000);
  CHECK(predicted_cost(m, CostKind::NonOptimized) == 100000);

  const CostModel greedy{100, 50, 10};
  CHECK(predicted_cost(greedy, CostKind::Greedy) == 701000);

  const CostModel global{10, 2, 3};
  CHECK(predicted_cost(global, CostKind::Global) == 1150);

  const CostModel unit{1, 1, 1};
  CHECK(predicted_cost(unit, CostKind::NonOptimized) == 1);
}

TEST_CASE("cost formulas agree with independent arithmetic on random inputs") {
  Rng rng = make_rng(62);
  for (int rep = 0; rep < 20; ++rep) {
    const std::int64_t k = 1 + std::int64_t(rng() % 100000);
    const std::int64_t mm = 1 + std::int64_t(rng() % 200);
    const std::int64_t n = 1 + std::int64_t(rng() % 20);
    const CostModel m{k, mm, n};
    CHECK(predicted_cost(m, CostKind::NonOptimized) == n * k);
    CHECK(predicted_cost(m, CostKind::Global) == mm * (std::int64_t(1) << n) * 7 * k + n * k);
    CHECK(predicted_cost(m, CostKind::Greedy) == n * (14 * mm + 1) * k);
    CHECK(predicted_cost(m, CostKind::WindowSearch) == 71 * n * k);
    CHECK(predicted_cost(m, CostKind::WindowSearchEss) == 71 * n * k);
    CHECK(predicted_cost(m, CostKind::SigmaHeuristic) == 4 * n * k);
    CHECK(predicted_cost(m, CostKind::PairGapHeuristic) == n * k);
    CHECK(predicted_cost(m, CostKind::RandomSchedule) == n * k);
  }
}

TEST_CASE("costs that exceed 64 bits are rejected, not wrapped") {
  const CostModel huge{1000, 50, 63};
  CHECK_THROWS_AS(predicted_cost(huge, CostKind::Global), ConfigError);
  const CostModel vast{std::int64_t(1) << 50, 200, 20};
  CHECK_THROWS_AS(predicted_cost(vast, CostKind::Greedy), ConfigError);
  // the same model stays finite under cheaper procedures
  CHECK(predicted_cost(huge, CostKind::SigmaHeuristic) == 4 * 63 * 1000);
}

TEST_CASE("model validation requires positive parameters") {
  CHECK_THROWS_AS(validate(CostModel{0, 1, 1}), ConfigError);
  CHECK_THROWS_AS(validate(CostModel{1, 0, 1}), ConfigError);
  CHECK_THROWS_AS(validate(CostModel{1, 1, 0}), ConfigError);
  CHECK_THROWS_AS(validate(CostModel{1, 1, -5}), ConfigError);
  CHECK_NOTHROW(validate(CostModel{1, 1, 1}));
}

TEST_CASE("the cost table names every procedure once") {
  const CostModel m{10, 3, 4};
  const auto table = cost_table(m);
  CHECK(table.size() == all_cost_kinds().size());
  for (const auto& [kind, ops] : table) {
    CHECK(ops == predicted_cost(m, kind));
    CHECK(!to_string(kind).empty());
  }
  CHECK(to_string(CostKind::WindowSearch) == "wes");
  CHECK(to_string(CostKind::WindowSearchEss) == "awes");
  CHECK(to_string(CostKind::SigmaHeuristic) == "sh");
  CHECK(to_string(CostKind::NonOptimized) == "non-optimized");
}

TEST_CASE("measured operation counters track the closed form") {
  // scripted single-shot run: every update touches each particle's weight once
  opcount::reset();
  const TrueSystem sys{1.0, LikelihoodModel::ideal()};
  RunConfig cfg;
  cfg.particles = 128;
  cfg.cet_budget = 25.0;
  cfg.seed = 63;
  const RunTrace trace =
      run_estimation_with(sys, cfg, [](const ParticleEnsemble&, Rng&) { return 1.0; });
  REQUIRE(trace.steps.size() == 25);
  const opcount::Counters& after = opcount::counters();
  CHECK(after.bayes_updates == 25);
  CHECK(after.weight_products == 25 * 128);

  // a full window-search run stays within an order of magnitude of the model;
  // the closed form ignores resampling and warmup bookkeeping
  opcount::reset();
  RunConfig wes_cfg;
  wes_cfg.strategy = default_strategy(StrategyKind::Wes);
  wes_cfg.particles = 200;
  wes_cfg.cet_budget = 300.0;
  wes_cfg.seed = 64;
  const RunTrace wes_trace = run_estimation(sys, wes_cfg);
  long long shots = 0;
  for (const TraceStep& s : wes_trace.steps) shots += s.shots;
  const CostModel model{200, 50, shots};
  const std::int64_t predicted = predicted_cost(model, CostKind::WindowSearch);
  const opcount::Counters& measured = opcount::counters();
  const long long observed = measured.weight_products + measured.integral_ops;
  CHECK(observed > predicted / 10);
  CHECK(observed < predicted * 10);
}

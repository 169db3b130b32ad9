#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "qfe/benchmark.hpp"

using namespace qfe;

namespace {

RunTrace make_trace(double omega, const std::vector<std::pair<double, double>>& cet_estimate,
                    TerminalStatus status = TerminalStatus::BudgetReached) {
  RunTrace t;
  t.omega_true = omega;
  t.status = status;
  for (const auto& [cet, estimate] : cet_estimate) {
    TraceStep s;
    s.cet = cet;
    s.t_chosen = cet;
    s.shots = 1;
    s.estimate = estimate;
    t.steps.push_back(s);
  }
  return t;
}

BenchmarkConfig small_config() {
  BenchmarkConfig cfg;
  cfg.strategies = {default_strategy(StrategyKind::Sh), default_strategy(StrategyKind::Rts)};
  cfg.n_runs = 2;
  cfg.particles = 150;
  cfg.cet_budget = 200.0;
  cfg.bins = 5;
  cfg.master_seed = 77;
  cfg.workers = 1;
  return cfg;
}

}  // namespace

TEST_CASE("error normalization divides by the truth or the domain width") {
  const Interval support{0.0, 2.0};
  CHECK(normalized_error(1.1, 1.0, ErrorNormalization::RelativeToTrue, support) ==
        doctest::Approx(0.1).epsilon(1e-12));
  CHECK(normalized_error(1.1, 1.0, ErrorNormalization::DomainWidth, support) ==
        doctest::Approx(0.05).epsilon(1e-12));
  CHECK(normalized_error(0.9, 1.0, ErrorNormalization::RelativeToTrue, support) ==
        doctest::Approx(0.1).epsilon(1e-12));

  CHECK(to_string(ErrorNormalization::RelativeToTrue) == "relative");
  CHECK(to_string(ErrorNormalization::DomainWidth) == "domain-width");
  CHECK(normalization_from_string("relative") == ErrorNormalization::RelativeToTrue);
  CHECK(normalization_from_string("domain-width") == ErrorNormalization::DomainWidth);
  CHECK_THROWS_AS(normalization_from_string("nope"), ConfigError);
}

TEST_CASE("log binning reproduces single-point bins exactly") {
  const RunTrace t =
      make_trace(1.0, {{1.0, 1.5}, {10.0, 1.05}, {100.0, 1.005}});
  const ScalingCurve curve =
      bin_log_average_exp({t}, 3, ErrorNormalization::RelativeToTrue, frequency_support());
  REQUIRE(curve.points.size() == 3);
  CHECK(curve.points[0].rmse == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(curve.points[1].rmse == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(curve.points[2].rmse == doctest::Approx(0.005).epsilon(1e-12));
  for (const CurvePoint& p : curve.points) {
    CHECK(p.run_count == 1);
    CHECK(p.point_count == 1);
  }
  CHECK(curve.points[0].cet_center < curve.points[1].cet_center);
  CHECK(curve.points[1].cet_center < curve.points[2].cet_center);
  CHECK(curve.clamped_values == 0);
}

TEST_CASE("runs are combined geometrically, points within a run quadratically") {
  // two runs land in the same bin with errors 0.1 and 0.001: the curve stores
  // their geometric mean
  const RunTrace a = make_trace(1.0, {{10.0, 1.1}});
  const RunTrace b = make_trace(1.0, {{10.0, 1.001}});
  const ScalingCurve curve =
      bin_log_average_exp({a, b}, 1, ErrorNormalization::RelativeToTrue, frequency_support());
  REQUIRE(curve.points.size() == 1);
  CHECK(curve.points[0].rmse == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(curve.points[0].cet_center == 10.0);  // degenerate log range pins the center
  CHECK(curve.points[0].run_count == 2);
  CHECK(curve.points[0].point_count == 2);

  // within one run the bin value is the root mean square
  const RunTrace c = make_trace(1.0, {{10.0, 1.3}, {11.0, 1.4}});
  const ScalingCurve rms_curve =
      bin_log_average_exp({c}, 1, ErrorNormalization::RelativeToTrue, frequency_support());
  REQUIRE(rms_curve.points.size() == 1);
  CHECK(rms_curve.points[0].rmse ==
        doctest::Approx(std::sqrt((0.09 + 0.16) / 2.0)).epsilon(1e-12));

  // identical errors everywhere pass through both averages unchanged
  const RunTrace d = make_trace(1.0, {{1.0, 1.2}, {10.0, 1.2}, {100.0, 1.2}});
  const ScalingCurve flat =
      bin_log_average_exp({d, d}, 2, ErrorNormalization::RelativeToTrue, frequency_support());
  for (const CurvePoint& p : flat.points)
    CHECK(p.rmse == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("exact estimates are clamped instead of breaking the log average") {
  const RunTrace t = make_trace(1.0, {{10.0, 1.0}, {20.0, 1.0}});
  const ScalingCurve curve =
      bin_log_average_exp({t}, 1, ErrorNormalization::RelativeToTrue, frequency_support());
  REQUIRE(curve.points.size() == 1);
  CHECK(curve.points[0].rmse == doctest::Approx(kRmseClampFloor).epsilon(1e-12));
  CHECK(curve.clamped_values > 0);
}

TEST_CASE("binning conserves the number of trace points") {
  std::vector<RunTrace> traces;
  long long total = 0;
  for (int r = 0; r < 4; ++r) {
    std::vector<std::pair<double, double>> pts;
    for (int i = 1; i <= 37; ++i) {
      pts.push_back({double(i) * (1.0 + 0.1 * r), 1.0 + 0.01 * i});
      ++total;
    }
    traces.push_back(make_trace(1.0, pts));
  }
  const ScalingCurve curve =
      bin_log_average_exp(traces, 6, ErrorNormalization::RelativeToTrue, frequency_support());
  long long seen = 0;
  for (const CurvePoint& p : curve.points) seen += p.point_count;
  CHECK(seen == total);

  CHECK_THROWS_AS(
      bin_log_average_exp({}, 3, ErrorNormalization::RelativeToTrue, frequency_support()),
      ConfigError);
  CHECK_THROWS_AS(bin_log_average_exp({RunTrace{}}, 3, ErrorNormalization::RelativeToTrue,
                                      frequency_support()),
                  ConfigError);
  const RunTrace bad = make_trace(1.0, {{0.0, 1.1}});
  CHECK_THROWS_AS(
      bin_log_average_exp({bad}, 3, ErrorNormalization::RelativeToTrue, frequency_support()),
      ConfigError);
}

TEST_CASE("log-log fits recover planted power laws") {
  ScalingCurve hl;
  for (const double cet : {10.0, 100.0, 1000.0, 1e4})
    hl.points.push_back({cet, 1.0 / cet, 1, 1});
  const FitResult f1 = fit_loglog(hl, 1.0);
  CHECK(f1.exponent == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(f1.multiplier == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f1.residual <= 1e-9);
  CHECK(f1.points_used == 4);

  ScalingCurve sql;
  for (const double cet : {1.0, 10.0, 100.0, 1000.0, 1e4})
    sql.points.push_back({cet, 3.0 / std::sqrt(cet), 1, 1});
  const FitResult f2 = fit_loglog(sql, 0.8);
  CHECK(f2.exponent == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(f2.multiplier == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(f2.points_used == 4);  // trailing 80% of five points

  CHECK_THROWS_AS(fit_loglog(hl, 0.5), FitError);  // two trailing points are not a fit
  ScalingCurve tiny;
  tiny.points.push_back({10.0, 0.1, 1, 1});
  tiny.points.push_back({100.0, 0.01, 1, 1});
  CHECK_THROWS_AS(fit_loglog(tiny, 1.0), FitError);
}

TEST_CASE("reference lines are anchored at the first curve point") {
  ScalingCurve curve;
  curve.points.push_back({10.0, 0.1, 1, 1});
  curve.points.push_back({100.0, 0.02, 1, 1});
  const ReferenceLines lines = reference_lines(curve);
  REQUIRE(lines.hl.points.size() == 2);
  REQUIRE(lines.sql.points.size() == 2);
  CHECK(lines.hl.points[0].rmse == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(lines.hl.points[1].rmse == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(lines.sql.points[1].rmse == doctest::Approx(0.1 / std::sqrt(10.0)).epsilon(1e-12));
  CHECK(lines.sql.points[1].cet_center == 100.0);

  // a single-point curve still produces decade-spanning guides
  ScalingCurve lone;
  lone.points.push_back({10.0, 0.1, 1, 1});
  const ReferenceLines spread = reference_lines(lone);
  REQUIRE(spread.hl.points.size() == 9);
  CHECK(spread.hl.points.front().cet_center == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(spread.hl.points.back().cet_center == doctest::Approx(1e4).epsilon(1e-9));
  CHECK(spread.hl.points.back().rmse == doctest::Approx(0.1 / 1000.0).epsilon(1e-9));
  CHECK(spread.sql.points.back().rmse ==
        doctest::Approx(0.1 / std::sqrt(1000.0)).epsilon(1e-9));
}

TEST_CASE("benchmark configs reject duplicates and out-of-range settings") {
  BenchmarkConfig cfg = small_config();
  cfg.strategies = {default_strategy(StrategyKind::Sh), default_strategy(StrategyKind::Sh)};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = small_config();
  cfg.n_runs = 1;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = small_config();
  cfg.bins = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = small_config();
  cfg.fit_window = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.fit_window = 1.5;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = small_config();
  cfg.strategies.clear();
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("benchmarks pair strategies on shared frequencies and reproduce exactly") {
  const BenchmarkConfig cfg = small_config();
  const BenchmarkResult result = run_benchmark(cfg);

  REQUIRE(result.frequencies.size() == 2);
  for (const double omega : result.frequencies) {
    CHECK(omega > 0.0);
    CHECK(omega <= kHalfPi);
  }
  REQUIRE(result.per_strategy.size() == 2);
  for (const StrategyResult& s : result.per_strategy) {
    REQUIRE(s.traces.size() == 2);
    for (std::size_t r = 0; r < s.traces.size(); ++r)
      CHECK(s.traces[r].omega_true == result.frequencies[r]);
  }

  const BenchmarkResult again = run_benchmark(cfg);
  BenchmarkConfig threaded = cfg;
  threaded.workers = 3;
  const BenchmarkResult parallel = run_benchmark(threaded);
  for (std::size_t s = 0; s < result.per_strategy.size(); ++s)
    for (std::size_t r = 0; r < result.per_strategy[s].traces.size(); ++r) {
      const RunTrace& base = result.per_strategy[s].traces[r];
      REQUIRE(!base.steps.empty());
      CHECK(base.steps.back().estimate == again.per_strategy[s].traces[r].steps.back().estimate);
      CHECK(base.steps.back().estimate ==
            parallel.per_strategy[s].traces[r].steps.back().estimate);
      CHECK(base.steps.size() == parallel.per_strategy[s].traces[r].steps.size());
    }
}

TEST_CASE("experiment counts average measurements and shots per completed run") {
  BenchmarkResult result;
  result.config = small_config();
  result.config.strategies = {default_strategy(StrategyKind::Wes)};
  StrategyResult s;
  s.strategy = result.config.strategies[0];
  s.traces.push_back(make_trace(1.0, {{1.0, 1.1}, {2.0, 1.1}, {3.0, 1.1}}));
  s.traces.push_back(
      make_trace(1.0, {{1.0, 1.1}, {2.0, 1.1}, {3.0, 1.1}, {4.0, 1.1}, {5.0, 1.1}}));
  for (RunTrace& t : s.traces) {
    long long n = 0;
    for (TraceStep& step : t.steps) {
      step.shots = 10;
      step.n_experiments = ++n;
    }
  }
  result.per_strategy.push_back(s);

  const std::vector<ExperimentCount> table = experiment_count_table(result);
  REQUIRE(table.size() == 1);
  CHECK(table[0].kind == StrategyKind::Wes);
  CHECK(table[0].mean_measurements == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(table[0].mean_shots == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(table[0].completed_runs == 2);
}

TEST_CASE("degenerate traces are excluded and reported") {
  StrategyResult s;
  s.strategy = default_strategy(StrategyKind::Sh);
  s.traces.push_back(make_trace(1.0, {{1.0, 1.1}}));
  s.traces.push_back(make_trace(1.0, {{1.0, 1.2}}, TerminalStatus::Degenerate));
  s.degenerate_runs = {1};
  CHECK(completed_traces(s).size() == 1);

  BenchmarkResult result;
  result.config = small_config();
  result.config.strategies = {s.strategy};
  result.config.n_runs = 2;
  result.frequencies = {1.0, 1.0};
  result.per_strategy.push_back(s);
  const std::vector<std::string> failures = benchmark_failures(result);
  REQUIRE(failures.size() == 1);

  result.per_strategy[0].degenerate_runs.clear();
  result.per_strategy[0].traces[1].status = TerminalStatus::BudgetReached;
  CHECK(benchmark_failures(result).empty());
}

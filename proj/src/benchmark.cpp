#include "qfe/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <utility>

namespace qfe {

std::string to_string(ErrorNormalization mode) {
  return mode == ErrorNormalization::RelativeToTrue ? "relative" : "domain-width";
}

ErrorNormalization normalization_from_string(const std::string& name) {
  if (name == "relative") return ErrorNormalization::RelativeToTrue;
  if (name == "domain-width") return ErrorNormalization::DomainWidth;
  throw ConfigError("unknown normalization '" + name + "' (expected relative or domain-width)");
}

void validate(const BenchmarkConfig& cfg) {
  if (cfg.strategies.empty()) throw ConfigError("benchmark needs at least one strategy");
  for (std::size_t i = 0; i < cfg.strategies.size(); ++i) {
    validate(cfg.strategies[i]);
    for (std::size_t j = i + 1; j < cfg.strategies.size(); ++j)
      if (cfg.strategies[i].kind == cfg.strategies[j].kind)
        throw ConfigError("duplicate strategy " + to_string(cfg.strategies[i].kind));
  }
  if (cfg.n_runs < 2) throw ConfigError("benchmark needs at least 2 runs");
  validate(cfg.resample);
  if (cfg.particles < 2) throw ConfigError("need at least 2 particles");
  if (!(cfg.cet_budget > 0.0)) throw ConfigError("cet_budget must be positive");
  if (cfg.max_experiments < 1) throw ConfigError("max_experiments must be >= 1");
  if (cfg.bins < 1) throw ConfigError("bins must be >= 1");
  if (!(cfg.fit_window > 0.0) || cfg.fit_window > 1.0)
    throw ConfigError("fit_window must lie in (0, 1]");
  if (cfg.workers < 0) throw ConfigError("workers must be nonnegative");
  if (!(cfg.support.width() > 0.0) || cfg.support.lower < 0.0)
    throw ConfigError("support must satisfy 0 <= lower < upper");
  if (!(cfg.failure_fraction_limit >= 0.0) || cfg.failure_fraction_limit > 1.0)
    throw ConfigError("failure_fraction_limit must lie in [0, 1]");
}

namespace {

RunConfig run_config_for(const BenchmarkConfig& cfg, const StrategyConfig& strategy,
                         int run_idx) {
  RunConfig rc;
  rc.strategy = strategy;
  rc.particles = cfg.particles;
  rc.resample = cfg.resample;
  rc.cet_budget = cfg.cet_budget;
  rc.max_experiments = cfg.max_experiments;
  rc.support = cfg.support;
  // keyed by the strategy's identity, not its list position, so a strategy's
  // runs do not change when the list around it does
  rc.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(run_idx) + 1,
                        static_cast<std::uint64_t>(strategy.kind) + 1);
  return rc;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg) {
  validate(cfg);

  BenchmarkResult result;
  result.config = cfg;

  // The frequency stream is independent of the strategy list, so adding a
  // strategy never changes which systems the others estimate.
  Rng freq_rng = make_rng(derive_seed(cfg.master_seed, 0xf4e9));
  result.frequencies.resize(static_cast<std::size_t>(cfg.n_runs));
  for (auto& f : result.frequencies)
    f = uniform_open_closed(freq_rng, cfg.support.lower, cfg.support.upper);

  const int n_strategies = static_cast<int>(cfg.strategies.size());
  result.per_strategy.resize(cfg.strategies.size());
  for (int s = 0; s < n_strategies; ++s) {
    result.per_strategy[s].strategy = cfg.strategies[s];
    result.per_strategy[s].traces.resize(static_cast<std::size_t>(cfg.n_runs));
  }

  const long long total_tasks = static_cast<long long>(n_strategies) * cfg.n_runs;
  unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(total_tasks));

  auto run_task = [&](long long task) {
    const int s = static_cast<int>(task / cfg.n_runs);
    const int r = static_cast<int>(task % cfg.n_runs);
    const TrueSystem system{result.frequencies[static_cast<std::size_t>(r)], cfg.model};
    result.per_strategy[s].traces[static_cast<std::size_t>(r)] =
        run_estimation(system, run_config_for(cfg, cfg.strategies[s], r));
  };

  if (workers <= 1) {
    for (long long task = 0; task < total_tasks; ++task) run_task(task);
  } else {
    std::atomic<long long> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const long long task = next.fetch_add(1);
          if (task >= total_tasks || failed.load()) return;
          try {
            run_task(task);
          } catch (...) {
            failed.store(true);
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) throw std::runtime_error("a benchmark worker failed");
  }

  for (auto& sr : result.per_strategy)
    for (int r = 0; r < cfg.n_runs; ++r)
      if (sr.traces[static_cast<std::size_t>(r)].status == TerminalStatus::Degenerate)
        sr.degenerate_runs.push_back(r);

  return result;
}

double normalized_error(double estimate, double omega_true, ErrorNormalization mode,
                        Interval support) {
  if (mode == ErrorNormalization::RelativeToTrue) {
    if (!(omega_true > 0.0)) throw DomainError("relative error needs omega_true > 0");
    return std::abs(estimate - omega_true) / omega_true;
  }
  if (!(support.width() > 0.0)) throw DomainError("domain-width error needs a nonempty support");
  return std::abs(estimate - omega_true) / support.width();
}

ScalingCurve bin_log_average_exp(const std::vector<RunTrace>& traces, int bins,
                                 ErrorNormalization mode, Interval support) {
  if (bins < 1) throw ConfigError("bins must be >= 1");
  if (traces.empty()) throw ConfigError("binning needs at least one trace");

  double cet_min = std::numeric_limits<double>::infinity();
  double cet_max = 0.0;
  for (const RunTrace& trace : traces) {
    if (trace.steps.empty()) throw ConfigError("cannot bin a trace without steps");
    for (const TraceStep& step : trace.steps) {
      if (!(step.cet > 0.0)) throw ConfigError("binning needs positive cumulative times");
      cet_min = std::min(cet_min, step.cet);
      cet_max = std::max(cet_max, step.cet);
    }
  }

  const double lmin = std::log10(cet_min);
  const double span = std::log10(cet_max) - lmin;
  const double bin_width = span / double(bins);
  const std::size_t n_runs = traces.size();

  std::vector<std::vector<double>> sum_sq(static_cast<std::size_t>(bins),
                                          std::vector<double>(n_runs, 0.0));
  std::vector<std::vector<long long>> counts(static_cast<std::size_t>(bins),
                                             std::vector<long long>(n_runs, 0));
  for (std::size_t r = 0; r < n_runs; ++r) {
    for (const TraceStep& step : traces[r].steps) {
      int j = 0;
      if (span > 0.0) {
        j = static_cast<int>(std::floor((std::log10(step.cet) - lmin) / bin_width));
        j = std::clamp(j, 0, bins - 1);
      }
      const double err = normalized_error(step.estimate, traces[r].omega_true, mode, support);
      sum_sq[static_cast<std::size_t>(j)][r] += err * err;
      counts[static_cast<std::size_t>(j)][r] += 1;
    }
  }

  ScalingCurve curve;
  for (int j = 0; j < bins; ++j) {
    double log_sum = 0.0;
    int runs_in_bin = 0;
    long long points = 0;
    for (std::size_t r = 0; r < n_runs; ++r) {
      const long long c = counts[static_cast<std::size_t>(j)][r];
      if (c == 0) continue;
      double rms = std::sqrt(sum_sq[static_cast<std::size_t>(j)][r] / double(c));
      if (rms < kRmseClampFloor) {
        rms = kRmseClampFloor;
        ++curve.clamped_values;
      }
      log_sum += std::log(rms);
      ++runs_in_bin;
      points += c;
    }
    if (runs_in_bin == 0) continue;
    CurvePoint point;
    point.cet_center =
        span > 0.0 ? std::pow(10.0, lmin + (double(j) + 0.5) * bin_width) : cet_min;
    point.rmse = std::exp(log_sum / double(runs_in_bin));
    point.run_count = runs_in_bin;
    point.point_count = points;
    curve.points.push_back(point);
  }
  return curve;
}

FitResult fit_loglog(const ScalingCurve& curve, double fit_window) {
  if (!(fit_window > 0.0) || fit_window > 1.0) throw ConfigError("fit_window must lie in (0, 1]");
  const int n = static_cast<int>(curve.points.size());
  const int count = std::min<int>(n, static_cast<int>(std::llround(fit_window * n)));
  if (count < 3) throw FitError("log-log fit needs at least 3 curve points in the window");

  std::vector<double> xs(static_cast<std::size_t>(count));
  std::vector<double> ys(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const CurvePoint& p = curve.points[static_cast<std::size_t>(n - count + i)];
    xs[static_cast<std::size_t>(i)] = std::log10(p.cet_center);
    ys[static_cast<std::size_t>(i)] = std::log10(p.rmse);
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < count; ++i) {
    mx += xs[static_cast<std::size_t>(i)];
    my += ys[static_cast<std::size_t>(i)];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < count; ++i) {
    const double dx = xs[static_cast<std::size_t>(i)] - mx;
    sxx += dx * dx;
    sxy += dx * (ys[static_cast<std::size_t>(i)] - my);
  }
  if (!(sxx > 0.0)) throw FitError("curve points share a single cet decade position");

  FitResult fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.multiplier = std::pow(10.0, intercept);
  double rss = 0.0;
  for (int i = 0; i < count; ++i) {
    const double resid =
        ys[static_cast<std::size_t>(i)] - (intercept + fit.exponent * xs[static_cast<std::size_t>(i)]);
    rss += resid * resid;
  }
  fit.residual = std::sqrt(rss / count);
  fit.points_used = count;
  return fit;
}

ReferenceLines reference_lines(const ScalingCurve& curve) {
  if (curve.points.empty()) throw ConfigError("reference lines need a nonempty curve");
  const double c0 = curve.points.front().cet_center;
  const double r0 = curve.points.front().rmse;
  auto line = [&](double slope) {
    ScalingCurve out;
    if (curve.points.size() >= 2) {
      for (const CurvePoint& p : curve.points)
        out.points.push_back({p.cet_center, r0 * std::pow(p.cet_center / c0, slope), 0, 0});
    } else {
      for (int k = 0; k <= 8; ++k) {
        const double cet = c0 * std::pow(10.0, 3.0 * double(k) / 8.0);
        out.points.push_back({cet, r0 * std::pow(cet / c0, slope), 0, 0});
      }
    }
    return out;
  };
  return {line(-0.5), line(-1.0)};
}

std::vector<RunTrace> completed_traces(const StrategyResult& result) {
  std::vector<RunTrace> out;
  for (const RunTrace& trace : result.traces)
    if (trace.status != TerminalStatus::Degenerate && !trace.steps.empty()) out.push_back(trace);
  return out;
}

ScalingCurve strategy_curve(const StrategyResult& result, const BenchmarkConfig& cfg) {
  const std::vector<RunTrace> traces = completed_traces(result);
  if (traces.empty()) return {};
  return bin_log_average_exp(traces, cfg.bins, cfg.normalization, cfg.support);
}

std::vector<ExperimentCount> experiment_count_table(const BenchmarkResult& result) {
  std::vector<ExperimentCount> table;
  for (const StrategyResult& sr : result.per_strategy) {
    ExperimentCount row;
    row.kind = sr.strategy.kind;
    long long measurements = 0;
    long long shots = 0;
    for (const RunTrace& trace : completed_traces(sr)) {
      measurements += trace.steps.back().n_experiments;
      for (const TraceStep& step : trace.steps) shots += step.shots;
      ++row.completed_runs;
    }
    if (row.completed_runs > 0) {
      row.mean_measurements = double(measurements) / row.completed_runs;
      row.mean_shots = double(shots) / row.completed_runs;
    }
    table.push_back(row);
  }
  return table;
}

std::vector<std::string> benchmark_failures(const BenchmarkResult& result) {
  std::vector<std::string> failures;
  const double limit = result.config.failure_fraction_limit * result.config.n_runs;
  for (const StrategyResult& sr : result.per_strategy) {
    const auto failed = static_cast<double>(sr.degenerate_runs.size());
    if (failed > limit) {
      failures.push_back(to_string(sr.strategy.kind) + " degenerated in " +
                         std::to_string(sr.degenerate_runs.size()) + " of " +
                         std::to_string(result.config.n_runs) + " runs");
    }
  }
  return failures;
}

}  // namespace qfe

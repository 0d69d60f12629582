#pragma once

// Monte Carlo harness for the bias and RMSE of the cross-scale averaged
// DFA regression estimator under ARFIMA regressors and errors.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "dfareg/arfima.hpp"
#include "dfareg/error.hpp"
#include "dfareg/fluctuation.hpp"

namespace dfareg {

enum class Design { sim_I, sim_II };

inline constexpr std::string_view to_string(Design d) noexcept {
  return d == Design::sim_I ? "sim_I" : "sim_II";
}

struct MonteCarloConfig {
  Design design = Design::sim_I;
  std::size_t length = 1000;
  std::size_t replications = 200;
  std::vector<double> d_sweep{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double fixed_d_x = 0.9;
  ScaleGrid scale_grid = ScaleGrid::linear(10, 100, 10);
  double alpha = 1.0;
  double beta = 1.0;
  std::uint64_t master_seed = 20150101;
  DetrendConfig detrend;
  std::size_t burn_in = 0;
  double max_exclusion_rate = 0.001;

  void validate() const {
    if (replications == 0) throw Error(ErrorCode::invalid_config, "replications must be >= 1");
    if (d_sweep.empty()) throw Error(ErrorCode::invalid_config, "d sweep is empty");
    for (double d : d_sweep) {
      if (!(d >= 0.0 && d <= 1.0)) {
        throw Error(ErrorCode::invalid_config, "d sweep values must lie in [0, 1]");
      }
    }
    if (design == Design::sim_II && !(fixed_d_x >= 0.0 && fixed_d_x <= 1.0)) {
      throw Error(ErrorCode::invalid_config, "fixed d_x must lie in [0, 1]");
    }
    if (length < kMinSeriesLength) throw Error(ErrorCode::invalid_config, "length too short");
    scale_grid.validate(length, detrend);
  }

  /// Full-size settings: T = 1000, R = 1000.
  static MonteCarloConfig paper(Design design) {
    MonteCarloConfig c;
    c.design = design;
    c.replications = 1000;
    return c;
  }

  /// Reduced replication count for routine runs.
  static MonteCarloConfig desk(Design design) {
    MonteCarloConfig c;
    c.design = design;
    c.replications = 200;
    return c;
  }
};

struct Summary {
  double mean = 0.0;
  double rmse = 0.0;
};

/// Arithmetic mean and root mean squared deviation from `truth`.
inline Summary summarize(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw Error(ErrorCode::invalid_input, "no estimates to summarize");
  double sum = 0.0, sq = 0.0;
  for (double e : estimates) {
    if (!std::isfinite(e)) throw Error(ErrorCode::non_finite, "non-finite estimate");
    sum += e;
    sq += (e - truth) * (e - truth);
  }
  const auto n = static_cast<double>(estimates.size());
  return {sum / n, std::sqrt(sq / n)};
}

struct ScaleSummary {
  std::size_t scale = 0;
  double mean_beta = 0.0;
  double rmse = 0.0;
};

struct SweepPoint {
  double d = 0.0;
  double mean_beta = 0.0;
  double rmse = 0.0;
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;
  std::vector<ScaleSummary> per_scale;
  Summary pooled;  // over every (replication, scale) estimate
};

struct MonteCarloReport {
  MonteCarloConfig config;
  std::vector<SweepPoint> points;
};

namespace detail {

struct Replication {
  std::vector<double> betas;
  bool excluded = false;
};

inline RegressionSimSpec replication_spec(const MonteCarloConfig& cfg, std::size_t point,
                                          std::size_t rep) {
  const double d = cfg.d_sweep[point];
  RegressionSimSpec spec;
  spec.alpha = cfg.alpha;
  spec.beta = cfg.beta;
  spec.x_spec.length = cfg.length;
  spec.x_spec.burn_in = cfg.burn_in;
  spec.x_spec.seed = derive_seed(cfg.master_seed, {point, rep, 0});
  spec.seed = derive_seed(cfg.master_seed, {point, rep, 1});
  if (cfg.design == Design::sim_I) {
    spec.x_spec.d = d;
    spec.error_kind = ErrorKind::gaussian;
  } else {
    spec.x_spec.d = cfg.fixed_d_x;
    spec.error_kind = ErrorKind::arfima;
    spec.error_d = d;
  }
  return spec;
}

inline Replication run_replication(const MonteCarloConfig& cfg, std::size_t point,
                                   std::size_t rep) {
  const RegressionPair pair = simulate_regression_pair(replication_spec(cfg, point, rep));
  const FluctuationTable table = fluctuation_table(pair.x, pair.y, cfg.scale_grid, cfg.detrend);
  Replication out;
  out.betas.reserve(table.rows.size());
  for (const FluctuationRow& row : table.rows) {
    if (row.fxx <= table.x_floor) {
      out.excluded = true;
      out.betas.clear();
      return out;
    }
    out.betas.push_back(row.fxy / row.fxx);
  }
  return out;
}

}  // namespace detail

/// Runs every sweep point. Results depend only on the config, never on
/// `workers`.
inline MonteCarloReport run_design(const MonteCarloConfig& cfg, unsigned workers = 1) {
  cfg.validate();
  const std::size_t n_points = cfg.d_sweep.size();
  const std::size_t reps = cfg.replications;
  const std::size_t jobs = n_points * reps;
  std::vector<detail::Replication> results(jobs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      try {
        results[job] = detail::run_replication(cfg, job / reps, job % reps);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs);
        return;
      }
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  MonteCarloReport report;
  report.config = cfg;
  const std::size_t n_scales = cfg.scale_grid.size();
  for (std::size_t p = 0; p < n_points; ++p) {
    SweepPoint sp;
    sp.d = cfg.d_sweep[p];
    std::vector<double> averaged;
    std::vector<std::vector<double>> by_scale(n_scales);
    std::vector<double> pooled;
    for (std::size_t r = 0; r < reps; ++r) {
      const detail::Replication& rep = results[p * reps + r];
      if (rep.excluded) {
        ++sp.n_excluded;
        continue;
      }
      double sum = 0.0;
      for (std::size_t k = 0; k < n_scales; ++k) {
        sum += rep.betas[k];
        by_scale[k].push_back(rep.betas[k]);
        pooled.push_back(rep.betas[k]);
      }
      averaged.push_back(sum / static_cast<double>(n_scales));
    }
    sp.n_used = averaged.size();
    const double rate = static_cast<double>(sp.n_excluded) / static_cast<double>(reps);
    if (sp.n_excluded > 0 && rate >= cfg.max_exclusion_rate) {
      throw Error(ErrorCode::excessive_exclusions,
                  std::to_string(sp.n_excluded) + " of " + std::to_string(reps) +
                      " replications excluded at d = " + std::to_string(sp.d));
    }
    const Summary s = summarize(averaged, cfg.beta);
    sp.mean_beta = s.mean;
    sp.rmse = s.rmse;
    sp.pooled = summarize(pooled, cfg.beta);
    for (std::size_t k = 0; k < n_scales; ++k) {
      const Summary ks = summarize(by_scale[k], cfg.beta);
      sp.per_scale.push_back({cfg.scale_grid[k], ks.mean, ks.rmse});
    }
    report.points.push_back(std::move(sp));
  }
  return report;
}

struct RankCorrelation {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided, Student-t approximation
};

/// Average ranks (1-based), ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline RankCorrelation spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 3) {
    throw Error(ErrorCode::invalid_input, "spearman needs two equal-length samples, n >= 3");
  }
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const auto n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  RankCorrelation out;
  if (saa == 0.0 || sbb == 0.0) return out;
  out.rho = sab / std::sqrt(saa * sbb);
  const double one_minus = 1.0 - out.rho * out.rho;
  if (one_minus <= 0.0) {
    out.p_value = 0.0;
    return out;
  }
  const double t = out.rho * std::sqrt((n - 2.0) / one_minus);
  const boost::math::students_t_distribution<double> dist(n - 2.0);
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return out;
}

}  // namespace dfareg

#pragma once

// Scale-dependent regression built on detrended variances and covariances:
// beta(s) = F^2_XY(s) / F^2_X(s), its standard error and R^2(s).

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "dfareg/error.hpp"
#include "dfareg/fluctuation.hpp"

namespace dfareg {

/// Demeaned y - beta * x induced by the estimate at one scale.
struct ResidualSeries {
  std::vector<double> values;
  std::size_t source_scale = 0;

  std::size_t size() const noexcept { return values.size(); }
};

enum class ScaleStatus { ok, degenerate_x, degenerate_y };

inline constexpr std::string_view to_string(ScaleStatus s) noexcept {
  switch (s) {
    case ScaleStatus::ok: return "ok";
    case ScaleStatus::degenerate_x: return "degenerate_x";
    case ScaleStatus::degenerate_y: return "degenerate_y";
  }
  return "unknown";
}

struct ScaleEstimate {
  std::size_t scale = 0;
  std::size_t n_windows = 0;
  ScaleStatus status = ScaleStatus::ok;
  std::optional<double> beta;
  std::optional<double> se;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<double> r2;
  // ybar - beta(s) * xbar; a convenience, not part of the estimator.
  std::optional<double> intercept;

  bool r2_negative() const noexcept { return r2 && *r2 < 0.0; }
};

struct ScaleRegressionCurve {
  double confidence_level = 0.95;
  double z = 0.0;
  std::size_t length = 0;
  std::size_t df = 0;
  DetrendConfig config;
  std::vector<ScaleEstimate> rows;
};

/// Two-sided standard normal critical value for the given coverage.
inline double normal_critical_value(double confidence_level) {
  if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
    throw Error(ErrorCode::invalid_config, "confidence level must lie in (0, 1)");
  }
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 0.5 + 0.5 * confidence_level);
}

inline double estimate_beta(const FluctuationTable& table, std::size_t scale) {
  const FluctuationRow& row = table.at(scale);
  if (row.fxx <= table.x_floor) {
    throw Error(ErrorCode::degenerate_regressor,
                "F^2_X vanishes at scale " + std::to_string(scale));
  }
  return row.fxy / row.fxx;
}

inline ResidualSeries residual_series(std::span<const double> x, std::span<const double> y,
                                      double beta, std::size_t source_scale = 0) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::length_mismatch, "series lengths differ");
  }
  ResidualSeries r;
  r.source_scale = source_scale;
  r.values.resize(x.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    r.values[t] = y[t] - x[t] * beta;
    sum += r.values[t];
  }
  const double mean = x.empty() ? 0.0 : sum / static_cast<double>(x.size());
  for (double& v : r.values) v -= mean;
  return r;
}

inline ResidualSeries residual_series(const TimeSeries& x, const TimeSeries& y, double beta,
                                      std::size_t source_scale = 0) {
  return residual_series(x.values(), y.values(), beta, source_scale);
}

/// var(beta(s)) = F^2_u(s) / F^2_X(s) / (T - 2).
inline double estimate_variance(const TimeSeries& x, const ResidualSeries& residuals,
                                std::size_t scale, const DetrendConfig& cfg) {
  if (residuals.size() != x.size()) {
    throw Error(ErrorCode::length_mismatch, "residuals and regressor differ in length");
  }
  const Profile px = build_profile(x);
  const double fxx = detrended_variance(px, scale, cfg);
  if (fxx <= detail::degeneracy_floor(px)) {
    throw Error(ErrorCode::degenerate_regressor,
                "F^2_X vanishes at scale " + std::to_string(scale));
  }
  const double fuu = detrended_variance(build_profile(residuals.values), scale, cfg);
  return fuu / fxx / static_cast<double>(x.size() - 2);
}

/// R^2(s) = 1 - F^2_u(s) / F^2_Y(s). Not clamped; may be negative.
inline double coefficient_of_determination(const ResidualSeries& residuals, const TimeSeries& y,
                                           std::size_t scale, const DetrendConfig& cfg) {
  if (residuals.size() != y.size()) {
    throw Error(ErrorCode::length_mismatch, "residuals and response differ in length");
  }
  const Profile py = build_profile(y);
  const double fyy = detrended_variance(py, scale, cfg);
  if (fyy <= detail::degeneracy_floor(py)) {
    throw Error(ErrorCode::degenerate_response,
                "F^2_Y vanishes at scale " + std::to_string(scale));
  }
  const double fuu = detrended_variance(build_profile(residuals.values), scale, cfg);
  return 1.0 - fuu / fyy;
}

/// Per-scale estimates over the grid. Degenerate scales are reported through
/// their status rather than aborting the curve.
inline ScaleRegressionCurve regression_curve(const TimeSeries& x, const TimeSeries& y,
                                             const ScaleGrid& grid, const DetrendConfig& cfg,
                                             double confidence_level = 0.95) {
  const double z = normal_critical_value(confidence_level);
  const Profile px = build_profile(x);
  const Profile py = build_profile(y);
  const FluctuationTable table = fluctuation_table(px, py, grid, cfg);

  ScaleRegressionCurve curve;
  curve.confidence_level = confidence_level;
  curve.z = z;
  curve.length = x.size();
  curve.df = x.size() - 2;
  curve.config = cfg;
  curve.rows.reserve(table.rows.size());

  for (const FluctuationRow& row : table.rows) {
    ScaleEstimate est;
    est.scale = row.scale;
    est.n_windows = row.n_windows;
    if (row.fxx <= table.x_floor) {
      est.status = ScaleStatus::degenerate_x;
      curve.rows.push_back(est);
      continue;
    }
    const double beta = row.fxy / row.fxx;
    const ResidualSeries u = residual_series(x, y, beta, row.scale);
    const double fuu = detrended_variance(build_profile(u.values), row.scale, cfg);
    const double se = std::sqrt(fuu / row.fxx / static_cast<double>(curve.df));
    est.beta = beta;
    est.se = se;
    est.ci_low = beta - z * se;
    est.ci_high = beta + z * se;
    est.intercept = py.source_mean - beta * px.source_mean;
    if (row.fyy <= table.y_floor) {
      est.status = ScaleStatus::degenerate_y;
    } else {
      est.r2 = 1.0 - fuu / row.fyy;
    }
    curve.rows.push_back(est);
  }
  return curve;
}

}  // namespace dfareg

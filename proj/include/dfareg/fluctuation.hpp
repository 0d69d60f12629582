#pragma once

// Profiles, local polynomial detrending and windowed detrended
// (co)variances F^2_X(s), F^2_Y(s), F^2_XY(s).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dfareg/error.hpp"

namespace dfareg {

inline constexpr std::size_t kMinSeriesLength = 4;
inline constexpr int kMaxPolyOrder = 3;

/// Ordered, equally spaced, finite observations.
class TimeSeries {
 public:
  explicit TimeSeries(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < kMinSeriesLength) {
      throw Error(ErrorCode::invalid_input,
                  "time series needs at least " + std::to_string(kMinSeriesLength) +
                      " observations, got " + std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw Error(ErrorCode::non_finite,
                    "non-finite observation at index " + std::to_string(i));
      }
    }
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

 private:
  std::vector<double> values_;
};

struct Profile {
  std::vector<double> values;
  double source_mean = 0.0;

  std::size_t size() const noexcept { return values.size(); }
};

enum class WindowMode { sliding, disjoint };

struct DetrendConfig {
  int poly_order = 1;
  WindowMode window_mode = WindowMode::sliding;

  void validate() const {
    if (poly_order < 0 || poly_order > kMaxPolyOrder) {
      throw Error(ErrorCode::invalid_config,
                  "polynomial order must be in [0, " + std::to_string(kMaxPolyOrder) +
                      "], got " + std::to_string(poly_order));
    }
  }

  std::size_t min_scale() const noexcept { return static_cast<std::size_t>(poly_order) + 2; }
};

/// Strictly increasing window lengths.
class ScaleGrid {
 public:
  ScaleGrid() = default;
  explicit ScaleGrid(std::vector<std::size_t> scales) : scales_(std::move(scales)) {
    if (scales_.empty()) {
      throw Error(ErrorCode::invalid_grid, "scale grid is empty");
    }
    for (std::size_t i = 1; i < scales_.size(); ++i) {
      if (scales_[i] <= scales_[i - 1]) {
        throw Error(ErrorCode::invalid_grid, "scales must be strictly increasing");
      }
    }
  }

  static ScaleGrid linear(std::size_t first, std::size_t last, std::size_t step) {
    if (step == 0 || last < first) {
      throw Error(ErrorCode::invalid_grid, "linear grid needs step > 0 and max >= min");
    }
    std::vector<std::size_t> s;
    for (std::size_t v = first; v <= last; v += step) s.push_back(v);
    return ScaleGrid(std::move(s));
  }

  /// Geometrically spaced scales, rounded and deduplicated.
  static ScaleGrid logarithmic(std::size_t first, std::size_t last, std::size_t count) {
    if (first == 0 || last < first || count == 0) {
      throw Error(ErrorCode::invalid_grid, "log grid needs 0 < min <= max and count > 0");
    }
    std::vector<std::size_t> s;
    const double lo = std::log(static_cast<double>(first));
    const double hi = std::log(static_cast<double>(last));
    for (std::size_t i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      const auto v = static_cast<std::size_t>(std::llround(std::exp(lo + t * (hi - lo))));
      if (s.empty() || v > s.back()) s.push_back(v);
    }
    return ScaleGrid(std::move(s));
  }

  /// Throws unless every scale satisfies m + 2 <= s <= T - 1.
  void validate(std::size_t length, const DetrendConfig& cfg) const {
    cfg.validate();
    if (scales_.empty()) throw Error(ErrorCode::invalid_grid, "scale grid is empty");
    if (scales_.front() < cfg.min_scale()) {
      throw Error(ErrorCode::invalid_grid,
                  "scale " + std::to_string(scales_.front()) + " is below poly_order + 2 = " +
                      std::to_string(cfg.min_scale()));
    }
    if (scales_.back() + 1 > length) {
      throw Error(ErrorCode::invalid_grid,
                  "scale " + std::to_string(scales_.back()) + " exceeds T - 1 = " +
                      std::to_string(length - 1));
    }
  }

  std::span<const std::size_t> scales() const noexcept { return scales_; }
  std::size_t size() const noexcept { return scales_.size(); }
  std::size_t operator[](std::size_t i) const noexcept { return scales_[i]; }
  auto begin() const noexcept { return scales_.begin(); }
  auto end() const noexcept { return scales_.end(); }

 private:
  std::vector<std::size_t> scales_;
};

struct FluctuationRow {
  std::size_t scale = 0;
  std::size_t n_windows = 0;
  double fxx = 0.0;
  double fyy = 0.0;
  double fxy = 0.0;
};

struct FluctuationTable {
  std::size_t length = 0;
  DetrendConfig config;
  std::vector<FluctuationRow> rows;
  // Values of fxx / fyy at or below these are rounding noise on an
  // exactly polynomial profile.
  double x_floor = 0.0;
  double y_floor = 0.0;

  const FluctuationRow& at(std::size_t scale) const {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [scale](const FluctuationRow& r) { return r.scale == scale; });
    if (it == rows.end()) {
      throw Error(ErrorCode::invalid_grid, "scale " + std::to_string(scale) + " not in table");
    }
    return *it;
  }
};

inline Profile build_profile(std::span<const double> series) {
  Profile p;
  if (series.empty()) return p;
  double sum = 0.0;
  for (double v : series) sum += v;
  p.source_mean = sum / static_cast<double>(series.size());
  p.values.resize(series.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    acc += series[t] - p.source_mean;
    p.values[t] = acc;
  }
  return p;
}

inline Profile build_profile(const TimeSeries& series) { return build_profile(series.values()); }

inline std::size_t window_count(std::size_t length, std::size_t scale, WindowMode mode) noexcept {
  if (scale == 0 || scale > length) return 0;
  return mode == WindowMode::sliding ? length - scale + 1 : length / scale;
}

/// Sliding mode divides by T - s (one less than the number of windows).
inline double averaging_divisor(std::size_t length, std::size_t scale, WindowMode mode) noexcept {
  return mode == WindowMode::sliding ? static_cast<double>(length - scale)
                                     : static_cast<double>(length / scale);
}

inline std::size_t window_start(std::size_t index, std::size_t scale, WindowMode mode) noexcept {
  return mode == WindowMode::sliding ? index : index * scale;
}

/// Orthonormal basis of polynomials of degree <= order sampled on a window
/// of length `scale`. Built by modified Gram-Schmidt on centred abscissae.
class TrendBasis {
 public:
  TrendBasis(std::size_t scale, int order) : scale_(scale), order_(order) {
    if (order < 0 || order > kMaxPolyOrder) {
      throw Error(ErrorCode::invalid_config, "polynomial order out of range");
    }
    if (scale < static_cast<std::size_t>(order) + 2) {
      throw Error(ErrorCode::invalid_grid, "window length must be at least order + 2");
    }
    const std::size_t cols = static_cast<std::size_t>(order) + 1;
    basis_.assign(cols * scale, 0.0);
    const double centre = 0.5 * static_cast<double>(scale - 1);
    const double half = std::max(centre, 1.0);
    for (std::size_t c = 0; c < cols; ++c) {
      double* q = &basis_[c * scale];
      for (std::size_t k = 0; k < scale; ++k) {
        q[k] = std::pow((static_cast<double>(k) - centre) / half, static_cast<double>(c));
      }
      // Two passes keep the columns orthogonal to working precision.
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t prev = 0; prev < c; ++prev) {
          const double* p = &basis_[prev * scale];
          double dot = 0.0;
          for (std::size_t k = 0; k < scale; ++k) dot += p[k] * q[k];
          for (std::size_t k = 0; k < scale; ++k) q[k] -= dot * p[k];
        }
      }
      double norm = 0.0;
      for (std::size_t k = 0; k < scale; ++k) norm += q[k] * q[k];
      norm = std::sqrt(norm);
      if (!(norm > 0.0)) {
        throw Error(ErrorCode::invalid_grid, "singular trend basis");
      }
      for (std::size_t k = 0; k < scale; ++k) q[k] /= norm;
    }
  }

  std::size_t scale() const noexcept { return scale_; }
  int order() const noexcept { return order_; }

  /// Writes window - projection(window) into `residual`.
  void detrend(std::span<const double> window, std::span<double> residual) const noexcept {
    std::copy(window.begin(), window.end(), residual.begin());
    const std::size_t cols = static_cast<std::size_t>(order_) + 1;
    for (std::size_t c = 0; c < cols; ++c) {
      const double* q = &basis_[c * scale_];
      double dot = 0.0;
      for (std::size_t k = 0; k < scale_; ++k) dot += q[k] * window[k];
      for (std::size_t k = 0; k < scale_; ++k) residual[k] -= dot * q[k];
    }
  }

 private:
  std::size_t scale_;
  int order_;
  std::vector<double> basis_;
};

namespace detail {

inline void check_window(std::size_t length, std::size_t start, std::size_t scale) {
  if (scale == 0 || start + scale > length) {
    throw Error(ErrorCode::invalid_input,
                "window [" + std::to_string(start) + ", " + std::to_string(start + scale) +
                    ") out of range for length " + std::to_string(length));
  }
}

inline double residual_dot(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum;
}

inline double max_abs(std::span<const double> v) noexcept {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double degeneracy_floor(const Profile& p) noexcept {
  const double bound = static_cast<double>(p.size()) * std::numeric_limits<double>::epsilon() *
                       max_abs(p.values);
  return bound * bound;
}

}  // namespace detail

/// Least-squares polynomial trend of degree `order` over
/// profile[start, start + scale), evaluated at each position of the window.
inline std::vector<double> fit_box_trend(const Profile& profile, std::size_t start,
                                         std::size_t scale, int order) {
  detail::check_window(profile.size(), start, scale);
  const TrendBasis basis(scale, order);
  std::span<const double> window(profile.values.data() + start, scale);
  std::vector<double> fitted(scale);
  basis.detrend(window, fitted);
  for (std::size_t k = 0; k < scale; ++k) fitted[k] = window[k] - fitted[k];
  return fitted;
}

/// f^2_XY(s, j): sum of in-window residual products divided by s - 1.
inline double box_cross_fluctuation(const Profile& px, const Profile& py, std::size_t start,
                                    std::size_t scale, const DetrendConfig& cfg) {
  if (px.size() != py.size()) {
    throw Error(ErrorCode::length_mismatch, "profiles differ in length");
  }
  cfg.validate();
  detail::check_window(px.size(), start, scale);
  const TrendBasis basis(scale, cfg.poly_order);
  std::vector<double> rx(scale), ry(scale);
  basis.detrend({px.values.data() + start, scale}, rx);
  basis.detrend({py.values.data() + start, scale}, ry);
  return detail::residual_dot(rx, ry) / static_cast<double>(scale - 1);
}

/// F^2(s) of a single profile at one scale.
inline double detrended_variance(const Profile& profile, std::size_t scale,
                                 const DetrendConfig& cfg) {
  cfg.validate();
  const std::size_t length = profile.size();
  if (scale < cfg.min_scale() || scale + 1 > length) {
    throw Error(ErrorCode::invalid_grid, "scale " + std::to_string(scale) + " out of range");
  }
  const TrendBasis basis(scale, cfg.poly_order);
  const std::size_t n = window_count(length, scale, cfg.window_mode);
  std::vector<double> r(scale);
  double total = 0.0;
  for (std::size_t w = 0; w < n; ++w) {
    basis.detrend({profile.values.data() + window_start(w, scale, cfg.window_mode), scale}, r);
    total += detail::residual_dot(r, r) / static_cast<double>(scale - 1);
  }
  return total / averaging_divisor(length, scale, cfg.window_mode);
}

inline FluctuationTable fluctuation_table(const Profile& px, const Profile& py,
                                          const ScaleGrid& grid, const DetrendConfig& cfg) {
  if (px.size() != py.size()) {
    throw Error(ErrorCode::length_mismatch,
                "series lengths differ: " + std::to_string(px.size()) + " vs " +
                    std::to_string(py.size()));
  }
  const std::size_t length = px.size();
  grid.validate(length, cfg);

  FluctuationTable table;
  table.length = length;
  table.config = cfg;
  table.x_floor = detail::degeneracy_floor(px);
  table.y_floor = detail::degeneracy_floor(py);
  table.rows.reserve(grid.size());

  for (std::size_t scale : grid) {
    const TrendBasis basis(scale, cfg.poly_order);
    const std::size_t n = window_count(length, scale, cfg.window_mode);
    const double box_divisor = static_cast<double>(scale - 1);
    std::vector<double> rx(scale), ry(scale);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
      const std::size_t start = window_start(w, scale, cfg.window_mode);
      basis.detrend({px.values.data() + start, scale}, rx);
      basis.detrend({py.values.data() + start, scale}, ry);
      sxx += detail::residual_dot(rx, rx) / box_divisor;
      syy += detail::residual_dot(ry, ry) / box_divisor;
      sxy += detail::residual_dot(rx, ry) / box_divisor;
    }
    const double divisor = averaging_divisor(length, scale, cfg.window_mode);
    table.rows.push_back({scale, n, sxx / divisor, syy / divisor, sxy / divisor});
  }
  return table;
}

inline FluctuationTable fluctuation_table(const TimeSeries& x, const TimeSeries& y,
                                          const ScaleGrid& grid, const DetrendConfig& cfg) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::length_mismatch,
                "series lengths differ: " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  return fluctuation_table(build_profile(x), build_profile(y), grid, cfg);
}

/// Univariate DFA: F^2(s) for every scale in the grid.
inline std::vector<double> dfa(const TimeSeries& x, const ScaleGrid& grid,
                               const DetrendConfig& cfg) {
  grid.validate(x.size(), cfg);
  const Profile p = build_profile(x);
  std::vector<double> out;
  out.reserve(grid.size());
  for (std::size_t s : grid) out.push_back(detrended_variance(p, s, cfg));
  return out;
}

namespace validation {

/// Least-squares slope of log sqrt(F^2(s)) against log s. Used to check
/// generated series against the expected fluctuation exponent, not as an
/// estimator in its own right.
inline double fluctuation_exponent(const ScaleGrid& grid, std::span<const double> f2) {
  if (grid.size() != f2.size() || grid.size() < 2) {
    throw Error(ErrorCode::invalid_input, "need at least two (scale, F^2) pairs");
  }
  const std::size_t n = grid.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(f2[i] > 0.0)) throw Error(ErrorCode::invalid_input, "F^2 must be positive");
    lx[i] = std::log(static_cast<double>(grid[i]));
    ly[i] = 0.5 * std::log(f2[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace validation

}  // namespace dfareg

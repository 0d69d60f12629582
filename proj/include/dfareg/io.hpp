#pragma once

// CSV ingestion, scale-grid specifications and CSV/JSON serialisation of
// regression curves, simulation specs and Monte Carlo reports.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfareg/arfima.hpp"
#include "dfareg/error.hpp"
#include "dfareg/fluctuation.hpp"
#include "dfareg/montecarlo.hpp"
#include "dfareg/regression.hpp"

#ifndef DFAREG_VERSION
#define DFAREG_VERSION "0.1.0"
#endif

namespace dfareg {

inline constexpr std::string_view kVersion = DFAREG_VERSION;
inline constexpr std::string_view kCurveCsvHeader = "scale,beta,se,ci_low,ci_high,r2,n_windows,status";
inline constexpr std::size_t kDefaultMinScale = 10;
inline constexpr std::size_t kMaxDefaultGridPoints = 120;

/// 17 significant digits; parses back to the same double.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string_view unquote(std::string_view s) noexcept {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? line.npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

/// Whole-cell numeric parse; accepts nan/inf spellings so that they can be
/// rejected explicitly later.
inline std::optional<double> parse_number(std::string_view cell) {
  cell = unquote(cell);
  if (cell.empty()) return std::nullopt;
  std::string buf(cell);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) return std::nullopt;
  return v;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
  s = trim(s);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace detail

using ColumnRef = std::variant<std::size_t, std::string>;

/// All-digit strings select by 0-based index, anything else by header name.
inline ColumnRef parse_column_ref(std::string_view s) {
  if (auto idx = detail::parse_index(s)) return *idx;
  return std::string(detail::trim(s));
}

enum class HeaderMode { detect, present, absent };

struct LoadOptions {
  ColumnRef x_column = std::size_t{0};
  ColumnRef y_column = std::size_t{1};
  HeaderMode header = HeaderMode::detect;
  bool log_x = false;
  bool log_y = false;
};

struct LoadedPair {
  TimeSeries x;
  TimeSeries y;
  std::vector<std::string> header;
};

/// Reads the two selected columns; other columns (dates, labels) are ignored.
/// Row numbers in diagnostics are 1-based file line numbers.
inline LoadedPair load_csv(std::istream& in, const LoadOptions& opts) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (detail::trim(line).empty()) continue;
    lines.emplace_back(lineno, std::move(line));
  }
  if (lines.empty()) throw Error(ErrorCode::invalid_input, "input has no rows");

  bool has_header = opts.header == HeaderMode::present;
  if (opts.header == HeaderMode::detect) {
    for (std::string_view cell : detail::split(lines.front().second, ',')) {
      if (!detail::parse_number(cell)) {
        has_header = true;
        break;
      }
    }
  }

  std::vector<std::string> header;
  if (has_header) {
    for (std::string_view cell : detail::split(lines.front().second, ',')) {
      header.emplace_back(detail::unquote(cell));
    }
  }

  auto resolve = [&](const ColumnRef& ref, std::string_view role) -> std::size_t {
    if (const auto* idx = std::get_if<std::size_t>(&ref)) return *idx;
    const auto& name = std::get<std::string>(ref);
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorCode::invalid_input,
                  "unknown " + std::string(role) + " column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xc = resolve(opts.x_column, "x");
  const std::size_t yc = resolve(opts.y_column, "y");

  std::vector<double> xs, ys;
  for (std::size_t i = has_header ? 1 : 0; i < lines.size(); ++i) {
    const auto& [row, text] = lines[i];
    const auto cells = detail::split(text, ',');
    auto cell_value = [&](std::size_t col, bool take_log, std::string_view role) {
      if (col >= cells.size()) {
        throw Error(ErrorCode::invalid_input, "row " + std::to_string(row) + ": missing " +
                                                  std::string(role) + " column " +
                                                  std::to_string(col));
      }
      const auto v = detail::parse_number(cells[col]);
      if (!v) {
        throw Error(ErrorCode::invalid_input, "row " + std::to_string(row) + ": non-numeric " +
                                                  std::string(role) + " value '" +
                                                  std::string(detail::trim(cells[col])) + "'");
      }
      if (!std::isfinite(*v)) {
        throw Error(ErrorCode::non_finite, "row " + std::to_string(row) + ": non-finite " +
                                               std::string(role) + " value");
      }
      if (take_log) {
        if (*v <= 0.0) {
          throw Error(ErrorCode::invalid_input, "row " + std::to_string(row) +
                                                    ": non-positive " + std::string(role) +
                                                    " value under log transform");
        }
        return std::log(*v);
      }
      return *v;
    };
    xs.push_back(cell_value(xc, opts.log_x, "x"));
    ys.push_back(cell_value(yc, opts.log_y, "y"));
  }
  if (xs.size() < kMinSeriesLength) {
    throw Error(ErrorCode::invalid_input, "need at least " + std::to_string(kMinSeriesLength) +
                                              " data rows, got " + std::to_string(xs.size()));
  }
  return {TimeSeries(std::move(xs)), TimeSeries(std::move(ys)), std::move(header)};
}

inline LoadedPair load_csv(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  return load_csv(in, opts);
}

/// Scale grid description, resolved against the series length once data is
/// loaded. Accepted forms:
///   "" | "auto"              linear from 10 to floor(T/4), at most 120 points
///   "linear:MIN:MAX[:STEP]"  MAX may be "auto" (floor(T/4)); STEP defaults as above
///   "log:MIN:MAX:COUNT"
///   "list:S1,S2,..." or "S1,S2,..."
struct ScaleSpec {
  enum class Kind { automatic, linear, log, list };
  Kind kind = Kind::automatic;
  std::size_t min = kDefaultMinScale;
  std::optional<std::size_t> max;
  std::optional<std::size_t> step_or_count;
  std::vector<std::size_t> list;

  static ScaleSpec parse(std::string_view text) {
    text = detail::trim(text);
    ScaleSpec spec;
    if (text.empty() || text == "auto") return spec;
    auto number = [&](std::string_view s) {
      auto v = detail::parse_index(s);
      if (!v) throw Error(ErrorCode::invalid_grid, "bad scale value '" + std::string(s) + "'");
      return *v;
    };
    auto parse_list = [&](std::string_view s) {
      spec.kind = Kind::list;
      for (std::string_view item : detail::split(s, ',')) spec.list.push_back(number(item));
      return spec;
    };
    if (text.starts_with("list:")) return parse_list(text.substr(5));
    if (text.starts_with("linear:") || text.starts_with("log:")) {
      const bool is_log = text.starts_with("log:");
      const auto parts = detail::split(text.substr(is_log ? 4 : 7), ':');
      if (parts.size() < 2 || parts.size() > 3 || (is_log && parts.size() != 3)) {
        throw Error(ErrorCode::invalid_grid, "malformed scale spec '" + std::string(text) + "'");
      }
      spec.kind = is_log ? Kind::log : Kind::linear;
      spec.min = number(parts[0]);
      if (detail::trim(parts[1]) != "auto") spec.max = number(parts[1]);
      if (parts.size() == 3) spec.step_or_count = number(parts[2]);
      return spec;
    }
    return parse_list(text);
  }

  ScaleGrid resolve(std::size_t length, const DetrendConfig& cfg) const {
    ScaleGrid grid;
    const std::size_t quarter = length / 4;
    switch (kind) {
      case Kind::list:
        grid = ScaleGrid(list);
        break;
      case Kind::log:
        grid = ScaleGrid::logarithmic(min, max.value_or(quarter), step_or_count.value_or(30));
        break;
      case Kind::automatic:
      case Kind::linear: {
        const std::size_t hi = max.value_or(quarter);
        if (hi < min) {
          throw Error(ErrorCode::invalid_grid,
                      "default scale grid [" + std::to_string(min) + ", T/4 = " +
                          std::to_string(hi) + "] is empty; pass explicit scales");
        }
        std::size_t step = step_or_count.value_or(0);
        if (step == 0) {
          const std::size_t span = hi - min;
          step = std::max<std::size_t>(1, (span + kMaxDefaultGridPoints - 2) /
                                              (kMaxDefaultGridPoints - 1));
        }
        grid = ScaleGrid::linear(min, hi, step);
        break;
      }
    }
    grid.validate(length, cfg);
    return grid;
  }
};

// --- enum <-> string ---------------------------------------------------------

inline std::string_view to_string(WindowMode m) noexcept {
  return m == WindowMode::sliding ? "sliding" : "disjoint";
}

inline WindowMode parse_window_mode(std::string_view s) {
  if (s == "sliding") return WindowMode::sliding;
  if (s == "disjoint") return WindowMode::disjoint;
  throw Error(ErrorCode::invalid_config, "unknown window mode '" + std::string(s) + "'");
}

inline Design parse_design(std::string_view s) {
  if (s == "sim_I" || s == "I" || s == "1") return Design::sim_I;
  if (s == "sim_II" || s == "II" || s == "2") return Design::sim_II;
  throw Error(ErrorCode::invalid_config, "unknown design '" + std::string(s) + "'");
}

// --- JSON --------------------------------------------------------------------

using nlohmann::json;

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("field '") + key + "': " + e.what());
  }
}

inline json optional_real(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> real_or_null(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace detail

inline json to_json(const DetrendConfig& c) {
  return {{"poly_order", c.poly_order}, {"mode", std::string(to_string(c.window_mode))}};
}

inline json to_json(const ScaleGrid& g) {
  return json(std::vector<std::size_t>(g.begin(), g.end()));
}

inline json to_json(const ArfimaSpec& s) {
  return {{"d", s.d},
          {"length", s.length},
          {"innovation_sd", s.innovation_sd},
          {"seed", s.seed},
          {"burn_in", s.burn_in},
          {"sign", s.sign == WeightSign::persistent ? "persistent" : "literal"}};
}

inline ArfimaSpec arfima_spec_from_json(const json& j) {
  ArfimaSpec s;
  s.d = detail::get_or(j, "d", s.d);
  s.length = detail::get_or(j, "length", s.length);
  s.innovation_sd = detail::get_or(j, "innovation_sd", s.innovation_sd);
  s.seed = detail::get_or(j, "seed", s.seed);
  s.burn_in = detail::get_or(j, "burn_in", s.burn_in);
  const auto sign = detail::get_or<std::string>(j, "sign", "persistent");
  if (sign == "persistent") {
    s.sign = WeightSign::persistent;
  } else if (sign == "literal") {
    s.sign = WeightSign::literal;
  } else {
    throw Error(ErrorCode::invalid_config, "unknown weight sign '" + sign + "'");
  }
  s.validate();
  return s;
}

inline json to_json(const RegressionSimSpec& s) {
  return {{"alpha", s.alpha},
          {"beta", s.beta},
          {"x", to_json(s.x_spec)},
          {"error", s.error_kind == ErrorKind::gaussian ? "gaussian" : "arfima"},
          {"error_d", s.error_d},
          {"seed", s.seed}};
}

inline RegressionSimSpec regression_sim_spec_from_json(const json& j) {
  RegressionSimSpec s;
  s.alpha = detail::get_or(j, "alpha", s.alpha);
  s.beta = detail::get_or(j, "beta", s.beta);
  if (j.contains("x")) s.x_spec = arfima_spec_from_json(j.at("x"));
  const auto kind = detail::get_or<std::string>(j, "error", "gaussian");
  if (kind == "gaussian") {
    s.error_kind = ErrorKind::gaussian;
  } else if (kind == "arfima") {
    s.error_kind = ErrorKind::arfima;
  } else {
    throw Error(ErrorCode::invalid_config, "unknown error kind '" + kind + "'");
  }
  s.error_d = detail::get_or(j, "error_d", s.error_d);
  s.seed = detail::get_or(j, "seed", s.seed);
  s.validate();
  return s;
}

inline json to_json(const MonteCarloConfig& c) {
  return {{"design", std::string(to_string(c.design))},
          {"length", c.length},
          {"replications", c.replications},
          {"d_sweep", c.d_sweep},
          {"fixed_d_x", c.fixed_d_x},
          {"scales", to_json(c.scale_grid)},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"seed", c.master_seed},
          {"poly_order", c.detrend.poly_order},
          {"mode", std::string(to_string(c.detrend.window_mode))},
          {"burn_in", c.burn_in},
          {"max_exclusion_rate", c.max_exclusion_rate}};
}

/// Missing fields fall back to the reduced-replication defaults.
inline MonteCarloConfig montecarlo_config_from_json(const json& j) {
  const Design design = parse_design(detail::get_or<std::string>(j, "design", "sim_I"));
  MonteCarloConfig c = MonteCarloConfig::desk(design);
  c.length = detail::get_or(j, "length", c.length);
  c.replications = detail::get_or(j, "replications", c.replications);
  c.d_sweep = detail::get_or(j, "d_sweep", c.d_sweep);
  c.fixed_d_x = detail::get_or(j, "fixed_d_x", c.fixed_d_x);
  c.alpha = detail::get_or(j, "alpha", c.alpha);
  c.beta = detail::get_or(j, "beta", c.beta);
  c.master_seed = detail::get_or(j, "seed", c.master_seed);
  c.detrend.poly_order = detail::get_or(j, "poly_order", c.detrend.poly_order);
  c.detrend.window_mode =
      parse_window_mode(detail::get_or<std::string>(j, "mode", "sliding"));
  c.burn_in = detail::get_or(j, "burn_in", c.burn_in);
  c.max_exclusion_rate = detail::get_or(j, "max_exclusion_rate", c.max_exclusion_rate);
  if (j.contains("scales")) {
    const json& s = j.at("scales");
    if (s.is_string()) {
      c.scale_grid = ScaleSpec::parse(s.get<std::string>()).resolve(c.length, c.detrend);
    } else {
      c.scale_grid = ScaleGrid(s.get<std::vector<std::size_t>>());
    }
  }
  c.validate();
  return c;
}

// --- regression curve --------------------------------------------------------

inline std::string curve_csv(const ScaleRegressionCurve& curve) {
  auto cell = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  std::string out(kCurveCsvHeader);
  out += '\n';
  for (const ScaleEstimate& r : curve.rows) {
    out += std::to_string(r.scale) + ',' + cell(r.beta) + ',' + cell(r.se) + ',' +
           cell(r.ci_low) + ',' + cell(r.ci_high) + ',' + cell(r.r2) + ',' +
           std::to_string(r.n_windows) + ',' + std::string(to_string(r.status)) + '\n';
  }
  return out;
}

/// Scale, estimate and band only.
inline std::string plot_csv(const ScaleRegressionCurve& curve) {
  std::string out = "scale,beta,ci_low,ci_high\n";
  for (const ScaleEstimate& r : curve.rows) {
    if (!r.beta) continue;
    out += std::to_string(r.scale) + ',' + format_real(*r.beta) + ',' + format_real(*r.ci_low) +
           ',' + format_real(*r.ci_high) + '\n';
  }
  return out;
}

inline json curve_rows_json(const ScaleRegressionCurve& curve) {
  json rows = json::array();
  for (const ScaleEstimate& r : curve.rows) {
    rows.push_back({{"scale", r.scale},
                    {"beta", detail::optional_real(r.beta)},
                    {"se", detail::optional_real(r.se)},
                    {"ci_low", detail::optional_real(r.ci_low)},
                    {"ci_high", detail::optional_real(r.ci_high)},
                    {"r2", detail::optional_real(r.r2)},
                    {"r2_negative", r.r2_negative()},
                    {"intercept_derived", detail::optional_real(r.intercept)},
                    {"n_windows", r.n_windows},
                    {"status", std::string(to_string(r.status))}});
  }
  return rows;
}

inline json curve_json(const ScaleRegressionCurve& curve, json meta = json::object()) {
  meta["version"] = std::string(kVersion);
  meta["confidence_level"] = curve.confidence_level;
  meta["z"] = curve.z;
  meta["length"] = curve.length;
  meta["df"] = curve.df;
  meta["detrend"] = to_json(curve.config);
  return {{"meta", std::move(meta)}, {"curve", curve_rows_json(curve)}};
}

inline ScaleStatus parse_scale_status(std::string_view s) {
  if (s == "ok") return ScaleStatus::ok;
  if (s == "degenerate_x") return ScaleStatus::degenerate_x;
  if (s == "degenerate_y") return ScaleStatus::degenerate_y;
  throw Error(ErrorCode::invalid_input, "unknown status '" + std::string(s) + "'");
}

inline ScaleRegressionCurve curve_from_json(const json& j) {
  ScaleRegressionCurve c;
  const json& meta = j.at("meta");
  c.confidence_level = meta.at("confidence_level").get<double>();
  c.z = meta.at("z").get<double>();
  c.length = meta.at("length").get<std::size_t>();
  c.df = meta.at("df").get<std::size_t>();
  c.config.poly_order = meta.at("detrend").at("poly_order").get<int>();
  c.config.window_mode = parse_window_mode(meta.at("detrend").at("mode").get<std::string>());
  for (const json& r : j.at("curve")) {
    ScaleEstimate e;
    e.scale = r.at("scale").get<std::size_t>();
    e.n_windows = r.at("n_windows").get<std::size_t>();
    e.status = parse_scale_status(r.at("status").get<std::string>());
    e.beta = detail::real_or_null(r, "beta");
    e.se = detail::real_or_null(r, "se");
    e.ci_low = detail::real_or_null(r, "ci_low");
    e.ci_high = detail::real_or_null(r, "ci_high");
    e.r2 = detail::real_or_null(r, "r2");
    e.intercept = detail::real_or_null(r, "intercept_derived");
    c.rows.push_back(e);
  }
  return c;
}

// --- Monte Carlo report ------------------------------------------------------

/// One "avg" row (cross-scale averaged estimator), one "pooled" row and one
/// row per scale for every sweep point.
inline std::string report_csv(const MonteCarloReport& report) {
  std::string out = "d,scale,mean_beta,rmse,n_used,n_excluded\n";
  for (const SweepPoint& p : report.points) {
    const std::string d = format_real(p.d);
    const std::string counts = ',' + std::to_string(p.n_used) + ',' + std::to_string(p.n_excluded);
    out += d + ",avg," + format_real(p.mean_beta) + ',' + format_real(p.rmse) + counts + '\n';
    out += d + ",pooled," + format_real(p.pooled.mean) + ',' + format_real(p.pooled.rmse) +
           counts + '\n';
    for (const ScaleSummary& s : p.per_scale) {
      out += d + ',' + std::to_string(s.scale) + ',' + format_real(s.mean_beta) + ',' +
             format_real(s.rmse) + counts + '\n';
    }
  }
  return out;
}

inline json report_json(const MonteCarloReport& report) {
  json points = json::array();
  for (const SweepPoint& p : report.points) {
    json scales = json::array();
    for (const ScaleSummary& s : p.per_scale) {
      scales.push_back({{"scale", s.scale}, {"mean_beta", s.mean_beta}, {"rmse", s.rmse}});
    }
    points.push_back({{"d", p.d},
                      {"mean_beta", p.mean_beta},
                      {"rmse", p.rmse},
                      {"n_used", p.n_used},
                      {"n_excluded", p.n_excluded},
                      {"pooled", {{"mean_beta", p.pooled.mean}, {"rmse", p.pooled.rmse}}},
                      {"per_scale", std::move(scales)}});
  }
  json meta = {{"version", std::string(kVersion)},
               {"seed", report.config.master_seed},
               {"config", to_json(report.config)}};
  return {{"meta", std::move(meta)}, {"report", std::move(points)}};
}

}  // namespace dfareg

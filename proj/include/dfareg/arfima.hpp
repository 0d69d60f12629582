#pragma once

// ARFIMA(0, d, 0) generation through the truncated AR(infinity)
// representation of (1 - L)^d x_t = e_t, and the two regression designs
// driven by it.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "dfareg/error.hpp"
#include "dfareg/fluctuation.hpp"

namespace dfareg {

/// `persistent` gives w_1 = +d. `literal` flips every sign, reproducing the
/// Gamma-ratio coefficients without the leading minus.
enum class WeightSign { persistent, literal };

struct ArfimaSpec {
  double d = 0.0;
  std::size_t length = 1000;
  double innovation_sd = 1.0;
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;
  WeightSign sign = WeightSign::persistent;

  void validate() const {
    if (!(d >= 0.0 && d <= 1.0)) {
      throw Error(ErrorCode::invalid_config, "d must lie in [0, 1], got " + std::to_string(d));
    }
    if (length < kMinSeriesLength) {
      throw Error(ErrorCode::invalid_config,
                  "series length must be at least " + std::to_string(kMinSeriesLength));
    }
    if (!(innovation_sd > 0.0) || !std::isfinite(innovation_sd)) {
      throw Error(ErrorCode::invalid_config, "innovation_sd must be positive");
    }
  }
};

enum class ErrorKind { gaussian, arfima };

struct RegressionSimSpec {
  double alpha = 1.0;
  double beta = 1.0;
  ArfimaSpec x_spec;
  ErrorKind error_kind = ErrorKind::gaussian;
  double error_d = 0.0;  // used when error_kind == arfima
  std::uint64_t seed = 0;

  void validate() const {
    x_spec.validate();
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
      throw Error(ErrorCode::invalid_config, "alpha and beta must be finite");
    }
    if (error_kind == ErrorKind::arfima && !(error_d >= 0.0 && error_d <= 1.0)) {
      throw Error(ErrorCode::invalid_config, "error d must lie in [0, 1]");
    }
  }
};

struct RegressionPair {
  TimeSeries x;
  TimeSeries y;
};

/// splitmix64 finaliser.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for a sub-stream identified by `path` under `master`.
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(master);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

/// AR weights w_1..w_n via w_1 = d, w_{i+1} = w_i (i - d) / (i + 1).
inline std::vector<double> arfima_weights(double d, std::size_t n,
                                          WeightSign sign = WeightSign::persistent) {
  if (!(d >= 0.0 && d < 1.0)) {
    throw Error(ErrorCode::invalid_config, "weights need d in [0, 1), got " + std::to_string(d));
  }
  if (n == 0) throw Error(ErrorCode::invalid_config, "weight count must be positive");
  std::vector<double> w(n);
  w[0] = d;
  for (std::size_t i = 1; i < n; ++i) {
    const double k = static_cast<double>(i);
    w[i] = w[i - 1] * (k - d) / (k + 1.0);
  }
  if (sign == WeightSign::literal) {
    for (double& v : w) v = -v;
  }
  return w;
}

inline std::vector<double> gaussian_noise(std::size_t n, double sd, std::uint64_t seed) {
  auto engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> e(n);
  for (double& v : e) v = normal(engine);
  return e;
}

/// x_t = sum_{i=1}^{t-1} w_i x_{t-i} + e_t from zero history; d = 1 is the
/// random walk. The first `burn_in` values are discarded.
inline TimeSeries generate_arfima(const ArfimaSpec& spec) {
  spec.validate();
  const std::size_t total = spec.length + spec.burn_in;
  const std::vector<double> e = gaussian_noise(total, spec.innovation_sd, spec.seed);
  std::vector<double> x(total);

  if (spec.d == 1.0) {
    double acc = 0.0;
    for (std::size_t t = 0; t < total; ++t) {
      acc += e[t];
      x[t] = acc;
    }
  } else if (spec.d == 0.0) {
    x = e;
  } else {
    const std::vector<double> w = arfima_weights(spec.d, total > 1 ? total - 1 : 1, spec.sign);
    for (std::size_t t = 0; t < total; ++t) {
      double acc = 0.0;
      for (std::size_t i = 1; i <= t; ++i) acc += w[i - 1] * x[t - i];
      x[t] = acc + e[t];
    }
  }
  return TimeSeries(std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(spec.burn_in),
                                        x.end()));
}

/// y = alpha + beta x + u; u is drawn from a stream derived from spec.seed,
/// independent of the x stream.
inline RegressionPair simulate_regression_pair(const RegressionSimSpec& spec) {
  spec.validate();
  TimeSeries x = generate_arfima(spec.x_spec);
  const std::uint64_t error_seed = derive_seed(spec.seed, {1});
  std::vector<double> u;
  if (spec.error_kind == ErrorKind::gaussian) {
    u = gaussian_noise(spec.x_spec.length, 1.0, error_seed);
  } else {
    ArfimaSpec us;
    us.d = spec.error_d;
    us.length = spec.x_spec.length;
    us.innovation_sd = 1.0;
    us.seed = error_seed;
    us.burn_in = spec.x_spec.burn_in;
    us.sign = spec.x_spec.sign;
    const TimeSeries series = generate_arfima(us);
    u.assign(series.begin(), series.end());
  }
  std::vector<double> y(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) y[t] = spec.alpha + spec.beta * x[t] + u[t];
  return {std::move(x), TimeSeries(std::move(y))};
}

}  // namespace dfareg

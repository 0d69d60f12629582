#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dfareg/regression.hpp"
#include "naive_oracle.hpp"

using namespace dfareg;

namespace {

std::vector<double> gaussian(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

std::vector<double> random_walk(std::size_t n, unsigned seed) {
  auto v = gaussian(n, seed);
  for (std::size_t i = 1; i < n; ++i) v[i] += v[i - 1];
  return v;
}

std::vector<double> affine(std::vector<double> v, double a, double b) {
  for (double& x : v) x = a * x + b;
  return v;
}

struct Pair {
  std::vector<double> x, y;
};

Pair correlated(std::size_t n, unsigned seed, double beta) {
  Pair p{random_walk(n, seed), gaussian(n, seed + 7)};
  for (std::size_t t = 0; t < n; ++t) p.y[t] += beta * p.x[t];
  return p;
}

}  // namespace

TEST(EstimateBeta, IdentityAndAffineResponse) {
  const auto xv = random_walk(200, 1);
  const TimeSeries x(xv);
  const ScaleGrid grid = ScaleGrid::linear(10, 50, 10);
  const auto same = fluctuation_table(x, x, grid, DetrendConfig{});
  const auto tripled = fluctuation_table(x, TimeSeries(affine(xv, 3.0, 5.0)), grid, DetrendConfig{});
  for (std::size_t s : grid) {
    EXPECT_EQ(estimate_beta(same, s), 1.0);
    EXPECT_NEAR(estimate_beta(tripled, s), 3.0, 1e-12);
  }
}

TEST(EstimateBeta, DegenerateRegressor) {
  const TimeSeries x({2, 2, 2, 2, 2, 2, 2, 2});
  const TimeSeries y({1, 4, 2, 8, 5, 7, 1, 0});
  const auto table = fluctuation_table(x, y, ScaleGrid({4}), DetrendConfig{});
  try {
    estimate_beta(table, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_regressor);
  }
}

TEST(ResidualSeries, Examples) {
  const std::vector<double> x{1, 2, 3}, y{2, 2, 5};
  const auto r = residual_series(x, y, 1.0);
  EXPECT_DOUBLE_EQ(r.values[0], 0.0);
  EXPECT_DOUBLE_EQ(r.values[1], -1.0);
  EXPECT_DOUBLE_EQ(r.values[2], 1.0);

  const auto xv = gaussian(50, 4);
  for (double v : residual_series(xv, xv, 1.0).values) EXPECT_EQ(v, 0.0);
  for (double v : residual_series(xv, affine(xv, 1.0, 4.25), 1.0).values) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(ResidualSeries, MeanIsZero) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto p = correlated(300, seed, 1.3);
    const auto r = residual_series(p.x, p.y, 0.7);
    double sum = 0.0, scale = 0.0;
    for (double v : r.values) {
      sum += v;
      scale = std::max(scale, std::abs(v));
    }
    EXPECT_LE(std::abs(sum / 300.0), 300 * 1e-16 * scale);
  }
}

TEST(EstimateVariance, ZeroResidualsAndScaling) {
  const auto p = correlated(120, 3, 0.8);
  const TimeSeries x(p.x);
  const DetrendConfig cfg;
  ResidualSeries zero{std::vector<double>(120, 0.0), 8};
  EXPECT_EQ(estimate_variance(x, zero, 8, cfg), 0.0);

  const auto u = residual_series(p.x, p.y, 0.8, 8);
  const double v1 = estimate_variance(x, u, 8, cfg);
  const double v2 = estimate_variance(TimeSeries(affine(p.x, 2.0, 0.0)), u, 8, cfg);
  EXPECT_NEAR(v2, v1 / 4.0, 1e-12 * v1);
}

TEST(EstimateVariance, MatchesOracleComposition) {
  const auto p = correlated(64, 17, 0.6);
  const TimeSeries x(p.x), y(p.y);
  const DetrendConfig cfg;
  const auto table = fluctuation_table(x, y, ScaleGrid({8}), cfg);
  const double beta = estimate_beta(table, 8);
  const auto u = residual_series(x, y, beta, 8);
  const auto o = oracle::regression_at(p.x, p.y, 8, 1, true);
  EXPECT_NEAR(beta, static_cast<double>(o.beta), 1e-10 * std::abs(static_cast<double>(o.beta)));
  const double var = estimate_variance(x, u, 8, cfg);
  EXPECT_NEAR(var, static_cast<double>(o.variance), 1e-10 * static_cast<double>(o.variance));
  const double r2 = coefficient_of_determination(u, y, 8, cfg);
  EXPECT_NEAR(r2, static_cast<double>(o.r2), 1e-10 * std::abs(static_cast<double>(o.r2)));
}

TEST(CoefficientOfDetermination, ExactFitAndDegenerateResponse) {
  const auto xv = gaussian(40, 5);
  const TimeSeries x(xv);
  const auto u = residual_series(x, x, 1.0);
  EXPECT_EQ(coefficient_of_determination(u, x, 8, DetrendConfig{}), 1.0);

  const TimeSeries flat(std::vector<double>(40, 3.0));
  try {
    coefficient_of_determination(u, flat, 8, DetrendConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_response);
  }
}

TEST(CoefficientOfDetermination, NullModelNearZero) {
  double total = 0.0;
  const int reps = 200;
  const ScaleGrid grid({20});
  for (int r = 0; r < reps; ++r) {
    const TimeSeries x(gaussian(500, 100 + r));
    const TimeSeries y(gaussian(500, 10000 + r));
    const auto curve = regression_curve(x, y, grid, DetrendConfig{});
    total += *curve.rows[0].r2;
  }
  EXPECT_LT(std::abs(total / reps), 0.05);
}

TEST(RegressionCurve, ExactFit) {
  const TimeSeries x(random_walk(300, 9));
  const auto curve = regression_curve(x, x, ScaleGrid::linear(10, 75, 5), DetrendConfig{});
  for (const auto& r : curve.rows) {
    EXPECT_EQ(r.status, ScaleStatus::ok);
    EXPECT_NEAR(*r.beta, 1.0, 1e-10);
    EXPECT_NEAR(*r.se, 0.0, 1e-10);
    EXPECT_NEAR(*r.r2, 1.0, 1e-10);
  }
}

TEST(RegressionCurve, ConfidenceLevels) {
  EXPECT_NEAR(normal_critical_value(0.95), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_critical_value(0.99), 2.5758293035489004, 1e-12);
  EXPECT_THROW(normal_critical_value(1.0), Error);
  EXPECT_THROW(normal_critical_value(0.0), Error);

  const auto p = correlated(400, 2, 0.5);
  const TimeSeries x(p.x), y(p.y);
  const ScaleGrid grid = ScaleGrid::linear(10, 100, 10);
  const auto c95 = regression_curve(x, y, grid, DetrendConfig{}, 0.95);
  const auto c99 = regression_curve(x, y, grid, DetrendConfig{}, 0.99);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto &a = c95.rows[i], &b = c99.rows[i];
    EXPECT_EQ(*a.beta, *b.beta);
    EXPECT_EQ(*a.se, *b.se);
    ASSERT_GT(*a.se, 0.0);
    EXPECT_LT(*a.ci_low, *a.beta);
    EXPECT_GT(*a.ci_high, *a.beta);
    EXPECT_LT(*b.ci_low, *a.ci_low);
    EXPECT_GT(*b.ci_high, *a.ci_high);
    EXPECT_NEAR((*b.ci_high - *b.ci_low) / (*a.ci_high - *a.ci_low), c99.z / c95.z, 1e-12);
  }
}

TEST(RegressionCurve, AffineEquivariance) {
  const auto p = correlated(300, 12, 1.7);
  const TimeSeries x(p.x), y(p.y);
  const ScaleGrid grid = ScaleGrid::linear(10, 70, 15);
  const auto base = regression_curve(x, y, grid, DetrendConfig{});
  for (auto [a, b] : {std::pair{2.5, -3.0}, std::pair{-0.4, 11.0}}) {
    const auto cx = regression_curve(TimeSeries(affine(p.x, a, b)), y, grid, DetrendConfig{});
    const auto cy = regression_curve(x, TimeSeries(affine(p.y, a, b)), grid, DetrendConfig{});
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& r = base.rows[i];
      EXPECT_NEAR(*cx.rows[i].beta, *r.beta / a, 1e-12 * std::abs(*r.beta / a));
      EXPECT_NEAR(*cx.rows[i].se, *r.se / std::abs(a), 1e-9 * *r.se / std::abs(a));
      EXPECT_NEAR(*cx.rows[i].r2, *r.r2, 1e-10);
      EXPECT_NEAR(*cy.rows[i].beta, a * *r.beta, 1e-12 * std::abs(a * *r.beta));
      EXPECT_NEAR(*cy.rows[i].r2, *r.r2, 1e-10);
    }
  }
}

TEST(RegressionCurve, ResidualsArePerScale) {
  const auto p = correlated(250, 31, 0.9);
  const TimeSeries x(p.x), y(p.y);
  const ScaleGrid grid = ScaleGrid::linear(10, 60, 25);
  const DetrendConfig cfg;
  const auto curve = regression_curve(x, y, grid, cfg);
  for (const auto& r : curve.rows) {
    const auto u = residual_series(x, y, *r.beta, r.scale);
    EXPECT_NEAR(*r.se, std::sqrt(estimate_variance(x, u, r.scale, cfg)), 1e-12 * *r.se);
    EXPECT_NEAR(*r.r2, coefficient_of_determination(u, y, r.scale, cfg), 1e-12);
  }
}

TEST(RegressionCurve, R2EqualsSquaredDetrendedCorrelation) {
  // With beta(s) = fxy/fxx, F^2_u = fyy - fxy^2/fxx, so R^2(s) = fxy^2/(fxx fyy).
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto p = correlated(150, 50 + seed, 0.3);
    const TimeSeries x(p.x), y(p.y);
    const ScaleGrid grid = ScaleGrid::linear(6, 36, 6);
    DetrendConfig cfg;
    cfg.poly_order = static_cast<int>(seed % 3);
    const auto table = fluctuation_table(x, y, grid, cfg);
    const auto curve = regression_curve(x, y, grid, cfg);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& t = table.rows[i];
      EXPECT_NEAR(*curve.rows[i].r2, t.fxy * t.fxy / (t.fxx * t.fyy), 1e-10);
      EXPECT_FALSE(curve.rows[i].r2_negative());
    }
  }
}

TEST(RegressionCurve, MatchesOracleOnSmallInstances) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const auto p = correlated(64, 200 + seed, -0.4);
    const auto curve =
        regression_curve(TimeSeries(p.x), TimeSeries(p.y), ScaleGrid({5, 8, 16, 40}), DetrendConfig{});
    for (const auto& r : curve.rows) {
      const auto o = oracle::regression_at(p.x, p.y, r.scale, 1, true);
      EXPECT_NEAR(*r.beta, static_cast<double>(o.beta), 1e-10 * std::abs(static_cast<double>(o.beta)));
      EXPECT_NEAR(*r.se * *r.se, static_cast<double>(o.variance),
                  1e-10 * static_cast<double>(o.variance));
      EXPECT_NEAR(*r.r2, static_cast<double>(o.r2), 1e-10);
    }
  }
}

TEST(RegressionCurve, DegenerateScalesAreMarked) {
  const TimeSeries flat(std::vector<double>(40, 1.5));
  const TimeSeries y(gaussian(40, 1));
  const auto cx = regression_curve(flat, y, ScaleGrid({5, 10}), DetrendConfig{});
  for (const auto& r : cx.rows) {
    EXPECT_EQ(r.status, ScaleStatus::degenerate_x);
    EXPECT_FALSE(r.beta.has_value());
    EXPECT_FALSE(r.r2.has_value());
  }
  const auto cy = regression_curve(y, flat, ScaleGrid({5, 10}), DetrendConfig{});
  for (const auto& r : cy.rows) {
    EXPECT_EQ(r.status, ScaleStatus::degenerate_y);
    EXPECT_EQ(*r.beta, 0.0);
    EXPECT_FALSE(r.r2.has_value());
  }
}

TEST(RegressionCurve, DerivedIntercept) {
  const auto xv = gaussian(100, 77);
  const auto curve = regression_curve(TimeSeries(xv), TimeSeries(affine(xv, 2.0, 4.0)),
                                      ScaleGrid({10, 20}), DetrendConfig{});
  for (const auto& r : curve.rows) EXPECT_NEAR(*r.intercept, 4.0, 1e-10);
}

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dfareg/montecarlo.hpp"

using namespace dfareg;

namespace {

MonteCarloConfig small_config(Design design) {
  MonteCarloConfig c = MonteCarloConfig::desk(design);
  c.length = 300;
  c.replications = 24;
  c.d_sweep = {0.0, 0.5, 1.0};
  c.scale_grid = ScaleGrid::linear(10, 50, 10);
  c.master_seed = 777;
  return c;
}

}  // namespace

TEST(Summarize, Examples) {
  const std::vector<double> ones{1, 1, 1};
  auto s = summarize(ones, 1.0);
  EXPECT_EQ(s.mean, 1.0);
  EXPECT_EQ(s.rmse, 0.0);

  const std::vector<double> sym{0, 2};
  s = summarize(sym, 1.0);
  EXPECT_EQ(s.mean, 1.0);
  EXPECT_EQ(s.rmse, 1.0);

  const std::vector<double> three{1.1, 0.8, 1.3};
  s = summarize(three, 1.0);
  EXPECT_NEAR(s.mean, 1.0666666666666667, 1e-15);
  EXPECT_NEAR(s.rmse, 0.21602468994692867, 1e-15);

  EXPECT_THROW(summarize(std::vector<double>{}, 1.0), Error);
}

TEST(Spearman, ReferenceValues) {
  // Frozen from scipy.stats.spearmanr.
  const std::vector<double> a{1, 2, 3, 4, 5}, b{5, 6, 7, 8, 7};
  auto r = spearman(a, b);
  EXPECT_NEAR(r.rho, 0.8207826816681233, 1e-12);
  EXPECT_NEAR(r.p_value, 0.08858700531354381, 1e-9);

  const std::vector<double> c{0.3, 0.1, 0.5, 0.2, 0.9, 0.7, 0.4}, d{2.0, 1.5, 2.2, 3.1, 1.0, 0.4, 0.8};
  r = spearman(c, d);
  EXPECT_NEAR(r.rho, -0.5, 1e-12);
  EXPECT_NEAR(r.p_value, 0.25316999510032273, 1e-9);

  const std::vector<double> up{1, 2, 3, 4}, down{9, 7, 3, 1};
  EXPECT_EQ(spearman(up, down).rho, -1.0);
  EXPECT_EQ(spearman(up, down).p_value, 0.0);
}

TEST(RunDesign, DeterministicAcrossWorkerCounts) {
  for (Design design : {Design::sim_I, Design::sim_II}) {
    const auto cfg = small_config(design);
    const auto a = run_design(cfg, 1);
    const auto b = run_design(cfg, 3);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      EXPECT_EQ(a.points[i].mean_beta, b.points[i].mean_beta);
      EXPECT_EQ(a.points[i].rmse, b.points[i].rmse);
      for (std::size_t k = 0; k < a.points[i].per_scale.size(); ++k) {
        EXPECT_EQ(a.points[i].per_scale[k].mean_beta, b.points[i].per_scale[k].mean_beta);
      }
    }
  }
}

TEST(RunDesign, ReportInvariants) {
  const auto report = run_design(small_config(Design::sim_I), 2);
  for (const auto& p : report.points) {
    EXPECT_EQ(p.n_used + p.n_excluded, 24u);
    EXPECT_EQ(p.n_excluded, 0u);
    EXPECT_GE(p.rmse, std::abs(p.mean_beta - 1.0));
    EXPECT_GE(p.pooled.rmse, std::abs(p.pooled.mean - 1.0));
    EXPECT_EQ(p.per_scale.size(), 5u);
    // The cross-scale average of per-scale means equals the mean of averages.
    double avg = 0.0;
    for (const auto& s : p.per_scale) avg += s.mean_beta;
    EXPECT_NEAR(avg / 5.0, p.mean_beta, 1e-12);
    EXPECT_NEAR(p.pooled.mean, p.mean_beta, 1e-12);
  }
}

TEST(RunDesign, NoMemoryCornerIsUnbiased) {
  auto cfg = MonteCarloConfig::desk(Design::sim_I);
  cfg.replications = 50;
  cfg.d_sweep = {0.0};
  const auto report = run_design(cfg, 2);
  EXPECT_NEAR(report.points[0].mean_beta, 1.0, 0.02);
}

TEST(RunDesign, NullModel) {
  auto cfg = small_config(Design::sim_I);
  cfg.beta = 0.0;
  const auto report = run_design(cfg, 2);
  for (const auto& p : report.points) EXPECT_NEAR(p.mean_beta, 0.0, 0.05);
}

TEST(RunDesign, SingleReplication) {
  auto cfg = small_config(Design::sim_I);
  cfg.replications = 1;
  cfg.d_sweep = {0.3};
  const auto a = run_design(cfg);
  const auto b = run_design(cfg);
  EXPECT_EQ(a.points[0].mean_beta, b.points[0].mean_beta);
  EXPECT_EQ(a.points[0].rmse, std::abs(a.points[0].mean_beta - 1.0));
}

TEST(MonteCarloConfig, Validation) {
  auto cfg = small_config(Design::sim_I);
  cfg.replications = 0;
  EXPECT_THROW(run_design(cfg), Error);
  cfg = small_config(Design::sim_I);
  cfg.d_sweep = {0.2, 1.5};
  EXPECT_THROW(run_design(cfg), Error);
  cfg = small_config(Design::sim_I);
  cfg.scale_grid = ScaleGrid({10, 400});
  EXPECT_THROW(run_design(cfg), Error);

  const auto paper = MonteCarloConfig::paper(Design::sim_II);
  EXPECT_EQ(paper.replications, 1000u);
  EXPECT_EQ(paper.length, 1000u);
  EXPECT_EQ(paper.fixed_d_x, 0.9);
  EXPECT_EQ(paper.d_sweep.size(), 11u);
  EXPECT_EQ(paper.scale_grid.size(), 10u);
}

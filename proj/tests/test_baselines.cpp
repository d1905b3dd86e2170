#include <gtest/gtest.h>

#include <cmath>

#include "mis/baselines.hpp"
#include "mis/scenario.hpp"
#include "oracles.hpp"

namespace {

using namespace mis;

Instance desk(int mr, int mc, int nr, int nc, int K) {
  Scenario s;
  s.layout.ms1_rows = mr;
  s.layout.ms1_cols = mc;
  s.layout.ms2_rows = nr;
  s.layout.ms2_cols = nc;
  s.users.count = K;
  return build_instance(s, 1);
}

TEST(WrapAngle, Range) {
  EXPECT_NEAR(wrap_angle(kPi + 0.5), -kPi + 0.5, 1e-12);
  EXPECT_NEAR(wrap_angle(-kPi - 0.5), kPi - 0.5, 1e-12);
  EXPECT_EQ(wrap_angle(0.25), 0.25);
  EXPECT_NEAR(wrap_angle(kPi), -kPi, 1e-12);
}

TEST(Quantized, Levels) {
  EXPECT_NEAR(std::abs(quantized_phase(1, 1) - cplx(-1.0, 0.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(quantized_phase(2, 1) - cplx(1.0, 0.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(quantized_phase(1, 2) - cplx(0.0, 1.0)), 0.0, 1e-12);
  const CVec v = expand_groups({1, 2}, 1, 2, 4);
  EXPECT_EQ(v(0), v(1));
  EXPECT_EQ(v(2), v(3));
  EXPECT_NE(v(0), v(2));
}

TEST(Quantized, CountsAndMatchesExhaustiveOracle) {
  const Instance inst = desk(1, 1, 1, 1, 2);
  QuantizedSearchConfig cfg;
  cfg.bits_phi = cfg.bits_theta = 1;
  const SearchResult r = quantized_search(inst.stats, inst.patterns, cfg, 1);
  EXPECT_EQ(r.evaluated, 4);
  EXPECT_FALSE(r.sampled);

  const Instance small = desk(2, 2, 1, 1, 2);
  cfg.bits_phi = cfg.bits_theta = 2;
  const SearchResult s = quantized_search(small.stats, small.patterns, cfg, 1);
  const oracle::QuantizedOptimum o =
      oracle::exhaustive_quantized(small.stats, small.patterns, 2, 2, Objective::kMinRate, 100.0);
  EXPECT_NEAR(s.score, o.score, 1e-12 * o.score);
  EXPECT_EQ(s.evaluated, 1024);
}

TEST(Quantized, WorkersDoNotChangeResult) {
  const Instance inst = desk(2, 2, 1, 1, 2);
  QuantizedSearchConfig cfg;
  EXPECT_EQ(quantized_search(inst.stats, inst.patterns, cfg, 1, 1).score,
            quantized_search(inst.stats, inst.patterns, cfg, 1, 3).score);
}

TEST(Quantized, SamplesWhenTooLarge) {
  const Instance inst = desk(3, 3, 2, 2, 2);
  QuantizedSearchConfig cfg;
  cfg.c_max = 500;
  const SearchResult r = quantized_search(inst.stats, inst.patterns, cfg, 1);
  EXPECT_TRUE(r.sampled);
  EXPECT_EQ(r.evaluated, 500);
}

TEST(Pso, TwoElementsNearGridOptimum) {
  const Instance inst = desk(1, 2, 0, 0, 1);
  PsoConfig cfg;
  const PsoResult r = pso_solve(inst.stats, inst.patterns, cfg, 1);
  const double grid = std::log2(1.0 + oracle::grid_max_quadratic(inst.stats.Xi[0], 360));
  EXPECT_GE(r.objective.min_rate, 0.95 * grid);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i], r.trace[i - 1]);
}

TEST(SingleLayer, MatchesGridOptimum) {
  const Instance inst = desk(1, 2, 0, 0, 1);
  const double grid = std::log2(1.0 + oracle::grid_max_quadratic(inst.stats.Xi[0], 360));
  for (SingleLayerSolver solver : {SingleLayerSolver::kBcd, SingleLayerSolver::kRcg}) {
    const SingleLayerResult r = single_layer_baseline(inst.stats, solver, 1);
    EXPECT_NEAR(r.objective.min_rate, grid, 1e-3 * grid);
    for (int m = 0; m < r.phi.size(); ++m) EXPECT_NEAR(std::abs(r.phi(m)), 1.0, 1e-12);
  }
}

TEST(Dynamic, PerUserOptimum) {
  const Instance inst = desk(1, 2, 0, 0, 2);
  const DynamicResult r = dynamic_ris_baseline(inst.stats, 1);
  ASSERT_EQ(r.v.size(), 2u);
  for (int k = 0; k < 2; ++k) {
    const double grid = oracle::grid_max_quadratic(inst.stats.Xi[static_cast<std::size_t>(k)], 720);
    EXPECT_NEAR(r.snr(k), grid, 1e-4 * grid);
    EXPECT_NEAR(r.snr(k), statistical_snr(r.v[static_cast<std::size_t>(k)], inst.stats.Xi[static_cast<std::size_t>(k)]),
                1e-9 * grid);
  }
}

TEST(Dynamic, UpperBoundsSharedDesigns) {
  const Instance inst = desk(3, 3, 2, 2, 3);
  const DynamicResult d = dynamic_ris_baseline(inst.stats, 1);
  const SingleLayerResult s = single_layer_baseline(desk(3, 3, 0, 0, 3).stats, SingleLayerSolver::kRcg, 1);
  EXPECT_GE(d.objective.throughput, s.objective.throughput * (1.0 - 1e-9));
}

TEST(Greedy, TiesGoToLowestIndex) {
  const RMat rates = (RMat(2, 3) << 1.0, 2.0, 2.0, 3.0, 1.0, 3.0).finished();
  const GreedyScore g = greedy_schedule(rates, Objective::kMinRate, 100.0);
  EXPECT_EQ(g.schedule.X(0, 1), 1.0);
  EXPECT_EQ(g.schedule.X(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(g.score, 2.0);
}

TEST(Baselines, RejectBadConfig) {
  PsoConfig p;
  p.swarm = 0;
  EXPECT_THROW(validate_pso_config(p), ConfigError);
  QuantizedSearchConfig q;
  q.bits_phi = 0;
  EXPECT_THROW(validate_quantized_config(q), ConfigError);
}

}  // namespace

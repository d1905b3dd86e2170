#include <benchmark/benchmark.h>

#include "mis/baselines.hpp"
#include "mis/bcd.hpp"
#include "mis/manifold.hpp"
#include "mis/random.hpp"
#include "mis/scenario.hpp"

namespace {

using namespace mis;

Instance instance(int ms1, int ms2, int K) {
  Scenario s;
  s.layout.ms1_rows = s.layout.ms1_cols = ms1;
  s.layout.ms2_rows = s.layout.ms2_cols = ms2;
  s.users.count = K;
  return build_instance(s, 1);
}

void BM_ChannelStats(benchmark::State& state) {
  Scenario s;
  s.layout.ms1_rows = s.layout.ms1_cols = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_instance(s, 1));
}
BENCHMARK(BM_ChannelStats)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_RateMatrix(benchmark::State& state) {
  const int ms1 = static_cast<int>(state.range(0));
  const Instance inst = instance(ms1, ms1 / 2, 6);
  Rng rng(1);
  const PhaseProfile p{random_unit_modulus(rng, inst.layout.M()), random_unit_modulus(rng, inst.layout.N())};
  for (auto _ : state) benchmark::DoNotOptimize(rate_matrix(inst.stats, inst.patterns, p));
}
BENCHMARK(BM_RateMatrix)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_ScheduleStep(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  RMat q(K, 9);
  for (int i = 0; i < q.size(); ++i) q.data()[i] = u(rng);
  const RMat X = RMat::Constant(K, 9, 1.0 / 9);
  for (auto _ : state) benchmark::DoNotOptimize(solve_p4_2(q, X, 0.1));
}
BENCHMARK(BM_ScheduleStep)->Arg(4)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_BlockObjectiveGrad(benchmark::State& state) {
  const Instance inst = instance(6, 4, 6);
  Rng rng(3);
  ManifoldPoint x{random_unit_modulus(rng, inst.layout.M()), random_unit_modulus(rng, inst.layout.N()),
                  {RMat::Constant(6, static_cast<Eigen::Index>(inst.patterns.size()), 1.0 / inst.patterns.size())}};
  for (auto _ : state) benchmark::DoNotOptimize(euclidean_grads(x, inst.patterns, inst.stats.Xi));
}
BENCHMARK(BM_BlockObjectiveGrad)->Unit(benchmark::kMicrosecond);

void BM_RcgSolve(benchmark::State& state) {
  const int ms1 = static_cast<int>(state.range(0));
  const Instance inst = instance(ms1, ms1 / 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(rcg_solve_p5(inst.stats, inst.patterns, RcgConfig{}, 1));
}
BENCHMARK(BM_RcgSolve)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_BcdSolve(benchmark::State& state) {
  const int ms1 = static_cast<int>(state.range(0));
  const Instance inst = instance(ms1, ms1 / 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(bcd_solve(inst.stats, inst.patterns, BcdConfig{}, 1));
}
BENCHMARK(BM_BcdSolve)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_PsoSolve(benchmark::State& state) {
  const Instance inst = instance(4, 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(pso_solve(inst.stats, inst.patterns, PsoConfig{}, 1));
}
BENCHMARK(BM_PsoSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <gtest/gtest.h>

#include "mis/bcd.hpp"
#include "mis/random.hpp"
#include "mis/scenario.hpp"
#include "oracles.hpp"

namespace {

using namespace mis;

Instance desk(int mr, int mc, int nr, int nc, int K, int L = 4) {
  Scenario s;
  s.layout.ms1_rows = mr;
  s.layout.ms1_cols = mc;
  s.layout.ms2_rows = nr;
  s.layout.ms2_cols = nc;
  s.layout.bs_antennas = L;
  s.users.count = K;
  return build_instance(s, 1);
}

TEST(Penalty, Values) {
  EXPECT_EQ(penalty_h(RMat::Identity(3, 3)), 0.0);
  EXPECT_DOUBLE_EQ(penalty_h(RMat::Constant(1, 1, 0.5)), 0.25);
  EXPECT_DOUBLE_EQ(penalty_h(RMat::Constant(2, 2, 0.5)), 1.0);
  EXPECT_THROW(penalty_h(RMat::Constant(1, 1, 1.5)), DomainError);
}

TEST(Penalty, TaylorLowerBound) {
  EXPECT_EQ(taylor_lb_scalar(0.7, 0.0), 0.0);
  EXPECT_EQ(taylor_lb_scalar(1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(taylor_lb_scalar(0.0, 0.5), -0.25);
  for (double a = 0; a <= 1.0; a += 0.1)
    for (double b = 0; b <= 1.0; b += 0.1) EXPECT_LE(taylor_lb_scalar(a, b), a * a + 1e-15);
}

TEST(ScheduleStep, SingleUserTakesArgmax) {
  const RMat q = (RMat(1, 3) << 1.0, 4.0, 2.0).finished();
  const ScheduleStep s = solve_p4_2(q, RMat::Constant(1, 3, 1.0 / 3), 0.0);
  EXPECT_NEAR(s.X(0, 1), 1.0, 1e-9);
  EXPECT_NEAR(s.mu, 4.0, 1e-9);
}

TEST(ScheduleStep, DecoupledUsers) {
  const RMat q = RMat::Identity(2, 2);
  const ScheduleStep s = solve_p4_2(q, RMat::Constant(2, 2, 0.5), 0.0);
  EXPECT_TRUE(s.X.isApprox(RMat::Identity(2, 2), 1e-9));
  EXPECT_NEAR(s.mu, 1.0, 1e-9);
}

TEST(ScheduleStep, MatchesBruteForceOnRandomInstances) {
  Rng rng(12);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 20; ++t) {
    RMat q(3, 3);
    for (int i = 0; i < 9; ++i) q.data()[i] = u(rng);
    const ScheduleStep s = solve_p4_2(q, RMat::Constant(3, 3, 1.0 / 3), 0.0);
    EXPECT_NEAR(s.mu, oracle::brute_force_maxmin_assignment(q), 1e-9);
  }
  EXPECT_THROW(solve_p4_2(RMat::Ones(2, 3), RMat::Constant(2, 2, 0.5), 0.0), ShapeError);
}

TEST(QuadraticForms, ConsistentWithDirectEvaluation) {
  const Instance inst = desk(3, 3, 2, 2, 2);
  Rng rng(4);
  PhaseProfile p{random_unit_modulus(rng, 9), random_unit_modulus(rng, 4)};
  for (const PhaseProfile& prof : {PhaseProfile{CVec::Ones(9), CVec::Ones(4)}, p}) {
    const QuadraticForms f = build_quadratic_forms(inst.patterns, inst.stats.Xi, prof);
    for (int k = 0; k < f.K; ++k)
      for (int u = 0; u < f.U; ++u) {
        const CVec v = composite_phase(inst.patterns[static_cast<std::size_t>(u)], prof.theta, prof.phi);
        const double direct = oracle::quad_form(inst.stats.Xi[static_cast<std::size_t>(k)], v);
        const int i = f.at(k, u);
        const double via_phi = prof.phi.dot(f.B[static_cast<std::size_t>(i)] * prof.phi).real();
        const double via_theta = prof.theta.dot(f.A[static_cast<std::size_t>(i)] * prof.theta).real() +
                                 2.0 * prof.theta.dot(f.a[static_cast<std::size_t>(i)]).real() +
                                 f.a_scalar[static_cast<std::size_t>(i)];
        EXPECT_NEAR(via_phi, direct, 1e-9 * direct);
        EXPECT_NEAR(via_theta, direct, 1e-9 * direct);
      }
  }
}

TEST(QuadraticForms, FullOverlapHasNoLinearTerm) {
  const Instance inst = desk(2, 2, 2, 2, 1);
  const QuadraticForms f = build_quadratic_forms(inst.patterns, inst.stats.Xi, {CVec::Ones(4), CVec::Ones(4)});
  EXPECT_EQ(f.a[0].norm(), 0.0);
  EXPECT_EQ(f.a_scalar[0], 0.0);
}

double maxmin_value(const std::vector<CVec>& g, const RVec& d, const CVec& x) {
  double v = 1e300;
  for (std::size_t k = 0; k < g.size(); ++k) v = std::min(v, g[k].dot(x).real() + d(static_cast<Eigen::Index>(k)));
  return v;
}

TEST(DiskSolvers, AgreeAndCertify) {
  Rng rng(8);
  for (int t = 0; t < 5; ++t) {
    std::vector<CVec> g;
    for (int k = 0; k < 3; ++k) g.push_back(complex_normal_vector(rng, 6) * 10.0);
    const RVec d = RVec::Random(3) * 5.0;
    const CVec start = CVec::Zero(6);
    const DiskSolution ip = maxmin_affine_disk_ip(g, d, start, 1e-9, 3000);
    const DiskSolution fo = maxmin_affine_disk(g, d, start, 1e-9, 20000);
    EXPECT_LE(ip.x.cwiseAbs().maxCoeff(), 1.0 + 1e-12);
    EXPECT_NEAR(ip.value, maxmin_value(g, d, ip.x), 1e-9);
    EXPECT_LE(ip.value, ip.upper_bound + 1e-9);
    EXPECT_NEAR(ip.value, fo.value, 1e-3 * std::max(1.0, std::abs(ip.value)));
    EXPECT_GE(ip.value, maxmin_value(g, d, start) - 1e-12);
  }
}

TEST(DiskSolvers, SingleAffineAlignsPhases) {
  Rng rng(9);
  const CVec c = complex_normal_vector(rng, 5);
  const DiskSolution s = maxmin_affine_disk_ip({c}, RVec::Zero(1), CVec::Zero(5), 1e-10, 3000);
  EXPECT_NEAR(s.value, c.cwiseAbs().sum(), 1e-6 * c.cwiseAbs().sum());
  const DiskSolution t = sumlog_affine_disk_ip({c}, RVec::Ones(1), CVec::Zero(5), 1e-10, 3000);
  EXPECT_NEAR(t.value, std::log2(2.0 + c.cwiseAbs().sum()), 1e-6);
}

TEST(Bcd, TinyInstanceMatchesGrid) {
  const Instance inst = desk(1, 2, 1, 1, 1, 2);
  const double grid = oracle::grid_best_profile(inst.stats, inst.patterns, Objective::kMinRate, 100.0, 72);
  double best = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed)
    best = std::max(best, bcd_solve(inst.stats, inst.patterns, BcdConfig{}, seed).objective.min_rate);
  EXPECT_GE(best, grid - 1e-2);
}

TEST(Bcd, ConvergenceContract) {
  const Instance inst = desk(4, 4, 2, 2, 3);
  const BcdResult r = bcd_solve(inst.stats, inst.patterns, BcdConfig{}, 5);
  EXPECT_LT(r.final_h, 1e-6);
  EXPECT_TRUE(r.schedule.is_binary());
  for (int k = 0; k < r.schedule.K(); ++k) EXPECT_EQ(r.schedule.X.row(k).sum(), 1.0);
  for (int m = 0; m < r.profile.phi.size(); ++m) EXPECT_NEAR(std::abs(r.profile.phi(m)), 1.0, 1e-12);
  EXPECT_LE(r.relaxation_change, 0.05);
  // The surrogate objective never drops within an outer iteration.
  for (std::size_t i = 1; i < r.trace.size(); ++i)
    if (r.trace[i].outer == r.trace[i - 1].outer)
      EXPECT_GE(r.trace[i].mu - r.trace[i].rho * r.trace[i].h,
                r.trace[i - 1].mu - r.trace[i - 1].rho * r.trace[i - 1].h - 1e-8 * std::abs(r.trace[i - 1].mu));
}

TEST(Bcd, MoreStartsNeverWorse) {
  const Instance inst = desk(2, 2, 1, 1, 2);
  BcdConfig one, many;
  many.starts = 4;
  EXPECT_GE(bcd_solve(inst.stats, inst.patterns, many, 3).objective.min_rate,
            bcd_solve(inst.stats, inst.patterns, one, 3).objective.min_rate);
}

TEST(Bcd, RejectsBadConfig) {
  BcdConfig c;
  c.zeta = 0.5;
  EXPECT_THROW(validate_bcd_config(c), ConfigError);
  c = BcdConfig{};
  c.starts = 0;
  EXPECT_THROW(validate_bcd_config(c), ConfigError);
}

}  // namespace

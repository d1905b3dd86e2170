#include <gtest/gtest.h>

#include "mis/channel.hpp"
#include "mis/random.hpp"
#include "mis/scenario.hpp"
#include "oracles.hpp"

namespace {

using namespace mis;

Instance desk(int mr, int mc, int nr, int nc, int K, double kappa_db = 10.0, int L = 4) {
  Scenario s;
  s.layout.ms1_rows = mr;
  s.layout.ms1_cols = mc;
  s.layout.ms2_rows = nr;
  s.layout.ms2_cols = nc;
  s.layout.bs_antennas = L;
  s.users.count = K;
  s.channel.kappa_bs_db = kappa_db;
  s.channel.kappa_user_db = {kappa_db};
  return build_instance(s, 1);
}

TEST(Steering, SingleElementAtOrigin) {
  const CVec a = steering_vector({Vec3::Zero()}, 0.3, 0.2, 0.05);
  ASSERT_EQ(a.size(), 1);
  EXPECT_EQ(a(0), cplx(1.0, 0.0));
}

TEST(Steering, HalfWavelengthBroadside) {
  const double lambda = 0.05;
  const CVec a = steering_vector({Vec3::Zero(), Vec3(lambda / 2, 0, 0)}, 0.0, 0.0, lambda);
  EXPECT_NEAR(std::abs(a(1) - std::polar(1.0, kPi)), 0.0, 1e-12);
  const CVec b = steering_vector({Vec3::Zero(), Vec3(lambda / 2, 0, 0)}, kPi / 2, 0.0, lambda);
  EXPECT_NEAR(std::abs(b(1) - cplx(1, 0)), 0.0, 1e-12);
  EXPECT_THROW(steering_vector({}, 0.0, 0.0, lambda), ShapeError);
}

TEST(Correlation, SincValues) {
  const double lambda = 0.05;
  EXPECT_EQ(correlation_matrix({Vec3::Zero()}, lambda)(0, 0), 1.0);
  const RMat half = correlation_matrix({Vec3::Zero(), Vec3(lambda / 2, 0, 0)}, lambda);
  EXPECT_NEAR(half(0, 1), 0.0, 1e-15);
  const RMat quarter = correlation_matrix({Vec3::Zero(), Vec3(lambda / 4, 0, 0)}, lambda);
  EXPECT_NEAR(quarter(0, 1), 2.0 / kPi, 1e-15);
  EXPECT_EQ(quarter(0, 1), quarter(1, 0));
}

TEST(Correlation, SqrtReproducesMatrix) {
  const Instance inst = desk(4, 4, 2, 2, 2);
  EXPECT_TRUE((inst.stats.S_mr_sqrt * inst.stats.S_mr_sqrt).isApprox(inst.stats.S_mr, 1e-8));
  EXPECT_TRUE((inst.stats.S_b_sqrt * inst.stats.S_b_sqrt).isApprox(inst.stats.S_b, 1e-8));
  for (int i = 0; i < inst.stats.M(); ++i) EXPECT_EQ(inst.stats.S_mr(i, i), 1.0);
}

TEST(Los, ScalarCase) {
  LayoutConfig c;
  c.ms1_rows = c.ms1_cols = c.ms2_rows = c.ms2_cols = 1;
  c.bs_antennas = 1;
  const MisLayout l = build_layout(c);
  const LosComponents los = los_components(l, {0.3, 0.1}, {0.2, 0.0}, {UserGeometry{{0.1, -0.5}, 20}});
  EXPECT_NEAR(std::abs(los.G_bar(0, 0) - cplx(1, 0)), 0.0, 1e-15);
}

TEST(Los, RankOneUnitModulusAndDistinctUsers) {
  const Instance inst = desk(6, 6, 4, 4, 6);
  const CMat& G = inst.stats.G_bar;
  Eigen::JacobiSVD<CMat> svd(G);
  EXPECT_LT(svd.singularValues()(1), 1e-10 * svd.singularValues()(0));
  EXPECT_TRUE((G.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b)
      EXPECT_GT((inst.stats.h_bar[static_cast<std::size_t>(a)] - inst.stats.h_bar[static_cast<std::size_t>(b)]).norm(), 1e-3);
}

XiInputs inputs_of(const ChannelStats& s, int k) {
  XiInputs in;
  in.iota = s.iota[static_cast<std::size_t>(k)];
  in.alpha1 = s.alpha1;
  in.alpha2 = s.alpha2[static_cast<std::size_t>(k)];
  in.beta1 = s.beta1;
  in.beta2 = s.beta2[static_cast<std::size_t>(k)];
  in.G_bar = &s.G_bar;
  in.h_bar = &s.h_bar[static_cast<std::size_t>(k)];
  in.S_mr = &s.S_mr;
  in.S_mt = &s.S_mt;
  in.S_b = &s.S_b;
  return in;
}

TEST(Xi, PureLosLimit) {
  const Instance inst = desk(3, 3, 2, 2, 1);
  XiInputs in = inputs_of(inst.stats, 0);
  in.beta1 = in.beta2 = std::numeric_limits<double>::infinity();
  const CMat Xi = xi_matrix(in);
  const CVec& h = inst.stats.h_bar[0];
  const CMat D = h.conjugate().asDiagonal();
  const CMat expect = in.iota * in.alpha1 * in.alpha2 * D * inst.stats.G_bar *
                      inst.stats.G_bar.adjoint() * h.asDiagonal();
  EXPECT_TRUE(Xi.isApprox(expect, 1e-12));
}

TEST(Xi, PureNlosLimit) {
  const Instance inst = desk(3, 3, 2, 2, 1);
  XiInputs in = inputs_of(inst.stats, 0);
  in.beta1 = in.beta2 = 0.0;
  const CMat Xi = xi_matrix(in);
  const RMat expect = in.iota * in.alpha1 * in.alpha2 * inst.stats.S_b.trace() *
                      inst.stats.S_mt.transpose().cwiseProduct(inst.stats.S_mr);
  EXPECT_TRUE(Xi.isApprox(expect.cast<cplx>(), 1e-12));
}

TEST(Xi, RejectsNegativeInputs) {
  const Instance inst = desk(2, 2, 1, 1, 1);
  XiInputs in = inputs_of(inst.stats, 0);
  in.beta1 = -1.0;
  EXPECT_THROW(xi_matrix(in), InvalidStats);
  in = inputs_of(inst.stats, 0);
  in.alpha2 = -1.0;
  EXPECT_THROW(xi_matrix(in), InvalidStats);
}

TEST(Xi, HermitianPsd) {
  const Instance inst = desk(6, 6, 4, 4, 6, 0.0);
  for (const CMat& Xi : inst.stats.Xi) {
    EXPECT_TRUE(Xi.isApprox(Xi.adjoint(), 1e-14));
    Eigen::SelfAdjointEigenSolver<CMat> eig(Xi);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8 * Xi.trace().real());
  }
}

TEST(Xi, MonteCarloSmallInstance) {
  const Instance inst = desk(2, 2, 1, 1, 1, 10.0, 2);
  Rng rng(5);
  for (int i = 0; i < 3; ++i) {
    const CVec v = random_unit_modulus(rng, 4);
    const auto mc = oracle::mc_snr_mean(inst.stats, v, 0, 100000, 11 + static_cast<std::uint64_t>(i));
    EXPECT_NEAR(statistical_snr(v, inst.stats.Xi[0]) / mc.mean, 1.0, 0.02);
  }
}

TEST(Draw, PureLosIsDeterministic) {
  Instance inst = desk(2, 2, 1, 1, 2);
  inst.stats.beta1 = std::numeric_limits<double>::infinity();
  for (double& b : inst.stats.beta2) b = std::numeric_limits<double>::infinity();
  const ChannelRealization r = draw_channel(inst.stats, 3);
  EXPECT_TRUE(r.G.isApprox(std::sqrt(inst.stats.alpha1) * inst.stats.G_bar));
  EXPECT_TRUE(r.h[1].isApprox(std::sqrt(inst.stats.alpha2[1]) * inst.stats.h_bar[1]));
}

TEST(Draw, IdentityCorrelationVariance) {
  Instance inst = desk(2, 2, 1, 1, 1);
  ChannelStats& s = inst.stats;
  s.beta1 = 0.0;
  s.alpha1 = 2.5;
  s.S_mr = s.S_mr_sqrt = RMat::Identity(4, 4);
  s.S_b = s.S_b_sqrt = RMat::Identity(s.L(), s.L());
  Rng rng(17);
  double acc = 0.0;
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) acc += std::norm(draw_channel(s, rng).G(1, 0));
  EXPECT_NEAR(acc / draws / 2.5, 1.0, 0.03);
}

TEST(Draw, FixedSeedIsBitIdentical) {
  const Instance inst = desk(3, 3, 2, 2, 2);
  const ChannelRealization a = draw_channel(inst.stats, 42);
  const ChannelRealization b = draw_channel(inst.stats, 42);
  EXPECT_EQ(a.G, b.G);
  EXPECT_EQ(a.h[1], b.h[1]);
}

TEST(Placement, EvenlySpacedAzimuths) {
  const auto users = auto_place_users(4, -kPi / 4, 20.0, 0.0, kPi / 3, false, 0);
  ASSERT_EQ(users.size(), 4u);
  EXPECT_DOUBLE_EQ(users[0].direction.azimuth, 0.0);
  EXPECT_DOUBLE_EQ(users[3].direction.azimuth, kPi / 3);
  EXPECT_DOUBLE_EQ(users[1].direction.elevation, -kPi / 4);
  const auto r = auto_place_users(8, -kPi / 4, 20.0, 0.0, kPi / 3, true, 9);
  for (const auto& u : r) {
    EXPECT_GE(u.direction.azimuth, 0.0);
    EXPECT_LE(u.direction.azimuth, kPi / 3);
  }
}

}  // namespace

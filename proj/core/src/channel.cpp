#include "mis/channel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace mis {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

// (LoS weight, NLoS weight) for a linear Rician factor; beta may be +inf.
std::pair<double, double> rician_weights(double beta) {
  if (std::isinf(beta)) return {1.0, 0.0};
  return {beta / (beta + 1.0), 1.0 / (beta + 1.0)};
}

double kappa_for_user(const ChannelConfig& cfg, std::size_t k) {
  if (cfg.kappa_user_db.size() == 1) return cfg.kappa_user_db.front();
  return cfg.kappa_user_db.at(k);
}

}  // namespace

double db_to_linear(double db) {
  if (std::isinf(db)) return db > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::pow(10.0, db / 10.0);
}

CVec steering_vector(const std::vector<Vec3>& positions, double azimuth, double elevation,
                     double wavelength) {
  if (positions.empty()) throw ShapeError("steering_vector: empty position list");
  if (!(wavelength > 0.0)) throw DomainError("steering_vector: wavelength must be positive");
  const Vec3 dir(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                 std::sin(elevation));
  const double wavenumber = 2.0 * kPi / wavelength;
  CVec a(static_cast<Eigen::Index>(positions.size()));
  for (std::size_t p = 0; p < positions.size(); ++p)
    a(static_cast<Eigen::Index>(p)) = std::polar(1.0, wavenumber * positions[p].dot(dir));
  return a;
}

RMat correlation_matrix(const std::vector<Vec3>& positions, double wavelength) {
  if (!(wavelength > 0.0)) throw DomainError("correlation_matrix: wavelength must be positive");
  const auto n = static_cast<Eigen::Index>(positions.size());
  RMat S(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    S(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (positions[i] - positions[j]).norm();
      S(i, j) = S(j, i) = sinc(2.0 * d / wavelength);
    }
  }
  return S;
}

RMat psd_sqrt(const RMat& S) {
  Eigen::SelfAdjointEigenSolver<RMat> eig(S);
  if (eig.info() != Eigen::Success) throw NumericError("psd_sqrt: eigendecomposition failed");
  RVec ev = eig.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -1e-6 * scale)
    throw NumericError("psd_sqrt: correlation matrix is indefinite (min eigenvalue " +
                       std::to_string(ev.minCoeff()) + ")");
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

LosComponents los_components(const MisLayout& layout, const Direction& mis_arrival,
                             const Direction& bs_departure, const std::vector<UserGeometry>& users) {
  LosComponents out;
  const CVec a_mis = steering_vector(layout.ms1_positions, mis_arrival.azimuth,
                                     mis_arrival.elevation, layout.wavelength);
  const CVec a_bs = steering_vector(layout.bs_positions, bs_departure.azimuth,
                                    bs_departure.elevation, layout.wavelength);
  out.G_bar = a_mis * a_bs.transpose();
  out.h_bar.reserve(users.size());
  for (const auto& u : users)
    out.h_bar.push_back(steering_vector(layout.ms1_positions, u.direction.azimuth,
                                        u.direction.elevation, layout.wavelength));
  return out;
}

CMat xi_matrix(const XiInputs& in) {
  if (!in.G_bar || !in.h_bar || !in.S_mr || !in.S_mt || !in.S_b)
    throw InvalidStats("xi_matrix: missing component");
  if (in.alpha1 < 0 || in.alpha2 < 0) throw InvalidStats("xi_matrix: negative path loss");
  if (in.beta1 < 0 || in.beta2 < 0) throw InvalidStats("xi_matrix: negative Rician factor");
  if (in.iota < 0) throw InvalidStats("xi_matrix: negative reference SNR");
  const CMat& G = *in.G_bar;
  const CVec& h = *in.h_bar;
  const auto M = G.rows();
  if (h.size() != M || in.S_mr->rows() != M || in.S_mt->rows() != M || in.S_b->rows() != G.cols())
    throw ShapeError("xi_matrix: inconsistent dimensions");

  const auto [los1, nlos1] = rician_weights(in.beta1);
  const auto [los2, nlos2] = rician_weights(in.beta2);
  const double scale = in.iota * in.alpha1 * in.alpha2;
  const double tr_b = in.S_b->trace();

  const CMat GG = G * G.adjoint();
  const CMat Smt_t = in.S_mt->transpose().cast<cplx>();
  // diag(h*) X diag(h) == X .* (conj(h) h^T)
  const CMat hh = h.conjugate() * h.transpose();

  CMat Xi = CMat::Zero(M, M);
  if (los1 * los2 > 0) Xi += (los2 * los1) * GG.cwiseProduct(hh);
  if (nlos2 * los1 > 0) Xi += (nlos2 * los1) * Smt_t.cwiseProduct(GG);
  if (los2 * nlos1 > 0) Xi += (los2 * nlos1 * tr_b) * in.S_mr->cast<cplx>().cwiseProduct(hh);
  if (nlos2 * nlos1 > 0)
    Xi += (nlos2 * nlos1 * tr_b) * Smt_t.cwiseProduct(in.S_mr->cast<cplx>());
  Xi *= scale;
  // Exact Hermitian symmetry (the terms are Hermitian up to roundoff).
  return 0.5 * (Xi + Xi.adjoint());
}

std::vector<UserGeometry> auto_place_users(int count, double elevation, double distance,
                                           double az_min, double az_max, bool random,
                                           std::uint64_t seed) {
  if (count <= 0) throw ConfigError("auto_place_users: user count must be positive");
  std::vector<UserGeometry> out(static_cast<std::size_t>(count));
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(az_min, az_max);
  for (int k = 0; k < count; ++k) {
    double az;
    if (random)
      az = uni(rng);
    else
      az = count == 1 ? 0.5 * (az_min + az_max)
                      : az_min + (az_max - az_min) * k / static_cast<double>(count - 1);
    out[static_cast<std::size_t>(k)] = UserGeometry{{az, elevation}, distance};
  }
  return out;
}

void refresh_xi(ChannelStats& s) {
  s.Xi.clear();
  s.Xi.reserve(s.h_bar.size());
  for (std::size_t k = 0; k < s.h_bar.size(); ++k) {
    XiInputs in;
    in.iota = s.iota[k];
    in.alpha1 = s.alpha1;
    in.alpha2 = s.alpha2[k];
    in.beta1 = s.beta1;
    in.beta2 = s.beta2[k];
    in.G_bar = &s.G_bar;
    in.h_bar = &s.h_bar[k];
    in.S_mr = &s.S_mr;
    in.S_mt = &s.S_mt;
    in.S_b = &s.S_b;
    s.Xi.push_back(xi_matrix(in));
  }
}

ChannelStats make_channel_stats(const MisLayout& layout, const ChannelConfig& cfg) {
  const std::size_t K = cfg.users.size();
  if (K == 0) throw ConfigError("channel: at least one user required");
  if (cfg.kappa_user_db.size() != 1 && cfg.kappa_user_db.size() != K)
    throw ConfigError("channel: kappa_user_db must have one entry or one per user");
  if (!(cfg.gamma_ref > 0.0)) throw ConfigError("channel: gamma_ref must be positive");

  ChannelStats s;
  const LosComponents los = los_components(layout, cfg.mis_arrival, cfg.bs_departure, cfg.users);
  s.G_bar = los.G_bar;
  s.h_bar = los.h_bar;
  // Both MIS-side correlations live on the MS1 grid: MS2 is stacked flush on
  // MS1, so the transmit-side aperture has the same pairwise distances.
  s.S_mr = correlation_matrix(layout.ms1_positions, layout.wavelength);
  s.S_mt = correlation_matrix(layout.ms1_positions, layout.wavelength);
  s.S_b = correlation_matrix(layout.bs_positions, layout.wavelength);
  s.S_mr_sqrt = psd_sqrt(s.S_mr);
  s.S_mt_sqrt = psd_sqrt(s.S_mt);
  s.S_b_sqrt = psd_sqrt(s.S_b);

  s.beta1 = db_to_linear(cfg.kappa_bs_db);
  const double p_mw = std::pow(10.0, cfg.power_dbm / 10.0);
  const auto& pl = cfg.path_loss;
  auto log_distance = [&](double d) {
    return std::pow(10.0, -(pl.reference_loss_db + 10.0 * pl.exponent * std::log10(d)) / 10.0);
  };
  s.alpha1 = pl.mode == PathLossMode::kFolded ? 1.0 : log_distance(pl.bs_mis_distance);
  for (std::size_t k = 0; k < K; ++k) {
    s.beta2.push_back(db_to_linear(kappa_for_user(cfg, k)));
    if (pl.mode == PathLossMode::kFolded) {
      s.alpha2.push_back(1.0);
      s.iota.push_back(cfg.gamma_ref * p_mw);
    } else {
      s.alpha2.push_back(log_distance(cfg.users[k].distance));
      s.iota.push_back(p_mw / std::pow(10.0, pl.noise_dbm / 10.0));
    }
  }
  refresh_xi(s);
  return s;
}

ChannelStats with_user_directions(const ChannelStats& base, const MisLayout& layout,
                                  const std::vector<UserGeometry>& users) {
  if (static_cast<int>(users.size()) != base.K())
    throw ShapeError("with_user_directions: user count mismatch");
  ChannelStats s = base;
  for (std::size_t k = 0; k < users.size(); ++k)
    s.h_bar[k] = steering_vector(layout.ms1_positions, users[k].direction.azimuth,
                                 users[k].direction.elevation, layout.wavelength);
  refresh_xi(s);
  return s;
}

CVec draw_user_nlos(const ChannelStats& stats, Rng& rng) {
  return stats.S_mt_sqrt * complex_normal_vector(rng, stats.M());
}

ChannelRealization draw_channel(const ChannelStats& stats, Rng& rng) {
  const int M = stats.M();
  const int L = stats.L();
  ChannelRealization out;

  const auto [los1, nlos1] = rician_weights(stats.beta1);
  CMat Sigma(M, L);
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < M; ++m) Sigma(m, l) = complex_normal(rng);
  out.G = std::sqrt(stats.alpha1) *
          (std::sqrt(los1) * stats.G_bar +
           std::sqrt(nlos1) * (stats.S_mr_sqrt * Sigma * stats.S_b_sqrt));

  out.h.reserve(stats.h_bar.size());
  for (std::size_t k = 0; k < stats.h_bar.size(); ++k) {
    const auto [los2, nlos2] = rician_weights(stats.beta2[k]);
    const CVec nlos = draw_user_nlos(stats, rng);
    out.h.push_back(std::sqrt(stats.alpha2[k]) *
                    (std::sqrt(los2) * stats.h_bar[k] + std::sqrt(nlos2) * nlos));
  }
  return out;
}

ChannelRealization draw_channel(const ChannelStats& stats, std::uint64_t seed) {
  Rng rng(seed);
  return draw_channel(stats, rng);
}

}  // namespace mis

#pragma once

#include <cstdint>
#include <vector>

#include "mis/geometry.hpp"
#include "mis/random.hpp"
#include "mis/types.hpp"

namespace mis {

/// Azimuth/elevation pair in radians. Elevation lies in [-pi/2, pi/2].
struct Direction {
  double azimuth = 0.0;
  double elevation = 0.0;
};

struct UserGeometry {
  Direction direction;     // MIS -> user
  double distance = 20.0;  // meters; only used by the log-distance path-loss model
};

enum class PathLossMode { kFolded, kLogDistance };

/// Path loss and noise. In the folded mode path loss and noise are absorbed
/// into a single reference SNR per milliwatt: alpha = 1, iota = gamma_ref * P[mW].
struct PathLossConfig {
  PathLossMode mode = PathLossMode::kFolded;
  double exponent = 2.2;
  double reference_loss_db = 30.0;  // loss at 1 m
  double noise_dbm = -90.0;
  double bs_mis_distance = 50.0;
};

struct ChannelConfig {
  std::vector<UserGeometry> users;
  Direction mis_arrival{kPi / 4.0, kPi / 6.0};    // BS -> MIS direction seen at the MIS
  Direction bs_departure{kPi / 3.0, 0.0};         // BS -> MIS direction seen at the BS
  double kappa_bs_db = 10.0;
  std::vector<double> kappa_user_db{10.0};        // one entry, or one per user
  double gamma_ref = 0.05;
  double power_dbm = 30.0;
  PathLossConfig path_loss;
};

/// Second-order statistics of the BS-MIS and MIS-user links.
struct ChannelStats {
  double alpha1 = 1.0;
  double beta1 = 10.0;
  std::vector<double> alpha2;
  std::vector<double> beta2;
  std::vector<double> iota;
  CMat G_bar;                  // M x L
  std::vector<CVec> h_bar;     // K entries of length M
  RMat S_mr;                   // M x M, MIS receive side
  RMat S_mt;                   // M x M, MIS transmit side
  RMat S_b;                    // L x L, BS side
  RMat S_mr_sqrt, S_mt_sqrt, S_b_sqrt;
  std::vector<CMat> Xi;        // K entries, M x M

  int M() const { return static_cast<int>(G_bar.rows()); }
  int L() const { return static_cast<int>(G_bar.cols()); }
  int K() const { return static_cast<int>(h_bar.size()); }
};

struct ChannelRealization {
  CMat G;               // M x L
  std::vector<CVec> h;  // K entries of length M
};

/// Far-field array response exp(j 2pi/lambda <p, k(az, el)>).
CVec steering_vector(const std::vector<Vec3>& positions, double azimuth, double elevation,
                     double wavelength);

/// sinc(2 |u_i - u_j| / lambda) with sinc(x) = sin(pi x) / (pi x).
RMat correlation_matrix(const std::vector<Vec3>& positions, double wavelength);

/// Symmetric PSD square root after clipping negative eigenvalues to zero.
RMat psd_sqrt(const RMat& S);

struct LosComponents {
  CMat G_bar;
  std::vector<CVec> h_bar;
};

LosComponents los_components(const MisLayout& layout, const Direction& mis_arrival,
                             const Direction& bs_departure, const std::vector<UserGeometry>& users);

/// Inputs of the closed-form SNR covariance of one user. Rician factors are
/// linear and may be +infinity (pure LoS).
struct XiInputs {
  double iota = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  const CMat* G_bar = nullptr;
  const CVec* h_bar = nullptr;
  const RMat* S_mr = nullptr;
  const RMat* S_mt = nullptr;
  const RMat* S_b = nullptr;
};

/// Four-term closed form of E{iota |G^H diag(h) v|^2} = v^H Xi v.
CMat xi_matrix(const XiInputs& in);

/// Users at a common elevation with azimuths evenly spaced over [az_min, az_max],
/// or drawn uniformly from that range when `random` is set.
std::vector<UserGeometry> auto_place_users(int count, double elevation, double distance,
                                           double az_min, double az_max, bool random,
                                           std::uint64_t seed);

double db_to_linear(double db);

ChannelStats make_channel_stats(const MisLayout& layout, const ChannelConfig& cfg);

/// Recomputes LoS vectors and Xi for new user directions while keeping path
/// loss, Rician factors and reference SNRs of `base`.
ChannelStats with_user_directions(const ChannelStats& base, const MisLayout& layout,
                                  const std::vector<UserGeometry>& users);

/// Rebuilds every Xi_k from the stored components (after editing iota, say).
void refresh_xi(ChannelStats& stats);

ChannelRealization draw_channel(const ChannelStats& stats, Rng& rng);
ChannelRealization draw_channel(const ChannelStats& stats, std::uint64_t seed);

/// NLoS part of the MIS-user link alone: S_mt^{1/2} z, z ~ CN(0, I).
CVec draw_user_nlos(const ChannelStats& stats, Rng& rng);

}  // namespace mis

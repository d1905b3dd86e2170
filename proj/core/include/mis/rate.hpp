#pragma once

#include <cstdint>
#include <vector>

#include "mis/channel.hpp"
#include "mis/geometry.hpp"
#include "mis/types.hpp"

namespace mis {

/// Static phase profiles of both layers. theta is empty without MS2.
struct PhaseProfile {
  CVec phi;
  CVec theta;
};

/// K x U assignment of users to beam patterns. Rows sum to one.
struct Schedule {
  RMat X;

  int K() const { return static_cast<int>(X.rows()); }
  int U() const { return static_cast<int>(X.cols()); }
  bool is_binary(double tol = 0.0) const;
  /// Pattern (0-based) assigned to user k: row argmax, lowest index on ties.
  int assigned(int k) const;
  static Schedule uniform(int K, int U);
  static Schedule from_assignment(const std::vector<int>& patterns, int U);
};

void validate_schedule(const Schedule& s, bool require_binary = false);

/// Per-user argmax with ties to the lowest pattern index.
Schedule threshold_schedule(const RMat& relaxed);

struct RateReport {
  std::vector<double> user_rates;  // bits/s/Hz
  double min_rate = 0.0;
  double throughput = 0.0;         // (T/K) * sum of user rates
};

struct ObjectiveValues {
  double min_rate = 0.0;
  double throughput = 0.0;
};

/// sqrt(P) G^H diag(h) v / |G^H diag(h) v|.
CVec mrt_beamformer(const CMat& G, const CVec& h, const CVec& v, double power);

/// iota |G^H diag(h) v|^2, the SNR reached by MRT.
double instantaneous_snr(const CMat& G, const CVec& h, const CVec& v, double iota);

/// Re{v^H Xi v}.
double statistical_snr(const CVec& v, const CMat& Xi);

inline double rate_from_snr(double snr) { return std::log2(1.0 + snr); }

/// log2(1 + v^H Xi v), the Jensen upper bound on the ergodic rate.
double jensen_rate(const CVec& v, const CMat& Xi);

/// Var(Y) / (2 ln2 (1 + a)^2): bound on log2(1 + E Y) - E log2(1 + Y) for Y >= a.
double jensen_gap_bound(double variance, double essential_inf = 0.0);

struct ErgodicEstimate {
  double mean = 0.0;       // sample mean of log2(1 + gamma)
  double std_error = 0.0;  // of the mean
  double jensen = 0.0;     // log2(1 + E gamma) from the closed form
  double snr_mean = 0.0;   // sample mean of gamma
  double snr_var = 0.0;    // sample variance of gamma
  double gap_bound = 0.0;  // jensen_gap_bound(snr_var)
  long trials = 0;
};

/// Monte Carlo ergodic rate of every user k for its composite phase vector
/// v[k]. All users share the BS-MIS draw of a trial. Trials are split in
/// fixed-size chunks with derived seeds, so the estimate does not depend on
/// `workers`.
std::vector<ErgodicEstimate> ergodic_rates_mc(const ChannelStats& stats,
                                              const std::vector<CVec>& v, long trials,
                                              std::uint64_t seed, int workers = 1);

/// Single-user form for one pattern and profile.
ErgodicEstimate ergodic_rate_mc(const ChannelStats& stats, const BeamPattern& pattern,
                                const PhaseProfile& profile, int user, long trials,
                                std::uint64_t seed, int workers = 1);

/// K x U matrix of statistical SNRs v_u^H Xi_k v_u.
RMat snr_matrix(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                const PhaseProfile& profile);

/// K x U matrix of Jensen rates.
RMat rate_matrix(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                 const PhaseProfile& profile);

/// min_k sum_u xi_ku r_ku and (T/K) sum_k sum_u xi_ku r_ku.
ObjectiveValues objectives(const Schedule& schedule, const RMat& rates, double total_time);

RateReport rate_report(const Schedule& schedule, const RMat& rates, double total_time);

}  // namespace mis

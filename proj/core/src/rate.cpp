#include "mis/rate.hpp"

#include <cmath>
#include <string>

#include "mis/parallel.hpp"
#include "mis/random.hpp"

namespace mis {

namespace {

constexpr long kChunk = 1024;

// Running mean / second central moment; merged with Chan's formula.
struct Moments {
  double n = 0, mean = 0, m2 = 0;
  void add(double x) {
    n += 1;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0) return;
    const double total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * n * o.n / total;
    n = total;
  }
  double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
};

std::pair<double, double> weights(double beta) {
  if (std::isinf(beta)) return {1.0, 0.0};
  return {beta / (beta + 1.0), 1.0 / (beta + 1.0)};
}

}  // namespace

bool Schedule::is_binary(double tol) const {
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    const double x = X.data()[i];
    if (std::abs(x) > tol && std::abs(x - 1.0) > tol) return false;
  }
  return true;
}

int Schedule::assigned(int k) const {
  Eigen::Index best = 0;
  for (Eigen::Index u = 1; u < X.cols(); ++u)
    if (X(k, u) > X(k, best)) best = u;
  return static_cast<int>(best);
}

Schedule Schedule::uniform(int K, int U) { return Schedule{RMat::Constant(K, U, 1.0 / U)}; }

Schedule Schedule::from_assignment(const std::vector<int>& patterns, int U) {
  Schedule s{RMat::Zero(static_cast<Eigen::Index>(patterns.size()), U)};
  for (std::size_t k = 0; k < patterns.size(); ++k) s.X(static_cast<Eigen::Index>(k), patterns[k]) = 1.0;
  return s;
}

void validate_schedule(const Schedule& s, bool require_binary) {
  for (int k = 0; k < s.K(); ++k) {
    if (std::abs(s.X.row(k).sum() - 1.0) > 1e-9)
      throw DomainError("schedule row " + std::to_string(k) + " does not sum to one");
    for (int u = 0; u < s.U(); ++u)
      if (s.X(k, u) < -1e-12 || s.X(k, u) > 1.0 + 1e-12)
        throw DomainError("schedule entry outside [0, 1]");
  }
  if (require_binary && !s.is_binary(1e-12)) throw DomainError("schedule is not binary");
}

Schedule threshold_schedule(const RMat& relaxed) {
  Schedule tmp{relaxed};
  std::vector<int> pick(static_cast<std::size_t>(relaxed.rows()));
  for (int k = 0; k < relaxed.rows(); ++k) pick[static_cast<std::size_t>(k)] = tmp.assigned(k);
  return Schedule::from_assignment(pick, static_cast<int>(relaxed.cols()));
}

CVec mrt_beamformer(const CMat& G, const CVec& h, const CVec& v, double power) {
  if (G.rows() != h.size() || h.size() != v.size()) throw ShapeError("mrt_beamformer: dimension mismatch");
  const CVec c = G.adjoint() * h.cwiseProduct(v);
  const double norm = c.norm();
  if (!(norm > 0.0)) throw DegenerateChannel("mrt_beamformer: zero cascade channel");
  return (std::sqrt(power) / norm) * c;
}

double instantaneous_snr(const CMat& G, const CVec& h, const CVec& v, double iota) {
  return iota * (G.adjoint() * h.cwiseProduct(v)).squaredNorm();
}

double statistical_snr(const CVec& v, const CMat& Xi) {
  if (v.size() != Xi.rows()) throw ShapeError("statistical_snr: dimension mismatch");
  return std::max(0.0, v.dot(Xi * v).real());
}

double jensen_rate(const CVec& v, const CMat& Xi) { return rate_from_snr(statistical_snr(v, Xi)); }

double jensen_gap_bound(double variance, double essential_inf) {
  return variance / (2.0 * kLn2 * (1.0 + essential_inf) * (1.0 + essential_inf));
}

std::vector<ErgodicEstimate> ergodic_rates_mc(const ChannelStats& stats, const std::vector<CVec>& v,
                                              long trials, std::uint64_t seed, int workers) {
  if (trials < 1) throw DomainError("ergodic_rates_mc: trials must be >= 1");
  const int K = stats.K();
  const int M = stats.M();
  const int L = stats.L();
  if (static_cast<int>(v.size()) != K) throw ShapeError("ergodic_rates_mc: one vector per user required");
  for (const auto& vk : v)
    if (vk.size() != M) throw ShapeError("ergodic_rates_mc: vector length mismatch");

  const auto [los1, nlos1] = weights(stats.beta1);
  const CMat Gbar_h = stats.G_bar.adjoint();
  const long chunks = (trials + kChunk - 1) / kChunk;
  std::vector<std::vector<Moments>> rate_m(static_cast<std::size_t>(chunks), std::vector<Moments>(K));
  std::vector<std::vector<Moments>> snr_m(static_cast<std::size_t>(chunks), std::vector<Moments>(K));

  parallel_for(chunks, workers, [&](long c) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    const long begin = c * kChunk;
    const long end = std::min(trials, begin + kChunk);
    CMat Sigma(M, L);
    for (long t = begin; t < end; ++t) {
      for (int l = 0; l < L; ++l)
        for (int m = 0; m < M; ++m) Sigma(m, l) = complex_normal(rng);
      for (int k = 0; k < K; ++k) {
        const auto [los2, nlos2] = weights(stats.beta2[k]);
        const CVec nlos = draw_user_nlos(stats, rng);
        const CVec h = std::sqrt(stats.alpha2[k]) * (std::sqrt(los2) * stats.h_bar[k] + std::sqrt(nlos2) * nlos);
        const CVec y = h.cwiseProduct(v[k]);
        CVec cascade = std::sqrt(los1) * (Gbar_h * y);
        if (nlos1 > 0)
          cascade += std::sqrt(nlos1) * (stats.S_b_sqrt * (Sigma.adjoint() * (stats.S_mr_sqrt * y)));
        const double gamma = stats.iota[k] * stats.alpha1 * cascade.squaredNorm();
        rate_m[c][k].add(rate_from_snr(gamma));
        snr_m[c][k].add(gamma);
      }
    }
  });

  std::vector<ErgodicEstimate> out(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    Moments r, s;
    for (long c = 0; c < chunks; ++c) {
      r.merge(rate_m[c][k]);
      s.merge(snr_m[c][k]);
    }
    auto& e = out[k];
    e.trials = trials;
    e.mean = r.mean;
    e.std_error = std::sqrt(r.variance() / static_cast<double>(trials));
    e.jensen = jensen_rate(v[k], stats.Xi[k]);
    e.snr_mean = s.mean;
    e.snr_var = s.variance();
    e.gap_bound = jensen_gap_bound(e.snr_var);
  }
  return out;
}

ErgodicEstimate ergodic_rate_mc(const ChannelStats& stats, const BeamPattern& pattern,
                                const PhaseProfile& profile, int user, long trials,
                                std::uint64_t seed, int workers) {
  if (user < 0 || user >= stats.K()) throw ShapeError("ergodic_rate_mc: user out of range");
  const CVec v = composite_phase(pattern, profile.theta, profile.phi);
  std::vector<CVec> all(static_cast<std::size_t>(stats.K()), v);
  return ergodic_rates_mc(stats, all, trials, seed, workers)[static_cast<std::size_t>(user)];
}

RMat snr_matrix(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                const PhaseProfile& profile) {
  const int K = stats.K();
  const auto U = static_cast<int>(patterns.size());
  RMat out(K, U);
  for (int u = 0; u < U; ++u) {
    const CVec v = composite_phase(patterns[u], profile.theta, profile.phi);
    for (int k = 0; k < K; ++k) out(k, u) = statistical_snr(v, stats.Xi[k]);
  }
  return out;
}

RMat rate_matrix(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                 const PhaseProfile& profile) {
  return snr_matrix(stats, patterns, profile).unaryExpr([](double s) { return rate_from_snr(s); });
}

ObjectiveValues objectives(const Schedule& schedule, const RMat& rates, double total_time) {
  if (schedule.X.rows() != rates.rows() || schedule.X.cols() != rates.cols())
    throw ShapeError("objectives: schedule and rate matrix shapes differ");
  validate_schedule(schedule);
  const RVec per_user = schedule.X.cwiseProduct(rates).rowwise().sum();
  ObjectiveValues out;
  out.min_rate = per_user.minCoeff();
  out.throughput = total_time / static_cast<double>(per_user.size()) * per_user.sum();
  return out;
}

RateReport rate_report(const Schedule& schedule, const RMat& rates, double total_time) {
  const ObjectiveValues o = objectives(schedule, rates, total_time);
  RateReport r;
  const RVec per_user = schedule.X.cwiseProduct(rates).rowwise().sum();
  r.user_rates.assign(per_user.data(), per_user.data() + per_user.size());
  r.min_rate = o.min_rate;
  r.throughput = o.throughput;
  return r;
}

}  // namespace mis

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mis/bcd.hpp"
#include "mis/channel.hpp"
#include "mis/geometry.hpp"
#include "mis/manifold.hpp"
#include "mis/types.hpp"

// Reference implementations written with plain loops. They share nothing with
// the solvers beyond the channel model and are used to check them.
namespace mis::oracle {

/// v^H Xi v by an explicit double loop.
double quad_form(const CMat& Xi, const CVec& v);

struct McMean {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean of iota |sum_m conj(G_ml) h_m v_m|^2 summed over l, over
/// `trials` channel draws of user k.
McMean mc_snr_mean(const ChannelStats& stats, const CVec& v, int k, long trials, std::uint64_t seed);

/// Central differences of f along the real and imaginary part of every
/// circle entry and along every block entry. Circle components come out as
/// df/dRe + j df/dIm, i.e. 2 df/dx*.
TangentVector fd_gradient(const std::function<double(const ManifoldPoint&)>& f,
                          const ManifoldPoint& x, double h = 1e-6);

/// Relative error |a - b| / max(|a|, |b|) over all components of two gradients.
double gradient_rel_error(const TangentVector& a, const TangentVector& b);

struct QuantizedOptimum {
  double score = 0.0;
  CVec phi;
  CVec theta;
  long combinations = 0;
};

/// Every quantized (phi, theta) with one element per group, each user on its
/// best pattern; min-rate or (T/K) sum-rate score.
QuantizedOptimum exhaustive_quantized(const ChannelStats& stats,
                                      const std::vector<BeamPattern>& patterns, int bits_phi,
                                      int bits_theta, Objective objective, double total_time);

/// Same score for one given profile.
double greedy_score(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                    const CVec& phi, const CVec& theta, Objective objective, double total_time);

/// Best over all binary assignments of min_k q(k, u_k).
double brute_force_maxmin_assignment(const RMat& q);

/// max over unit-modulus v of v^H Xi v with the first phase fixed (the form
/// is invariant to a common phase) on a grid of `steps` points per phase.
double grid_max_quadratic(const CMat& Xi, int steps);

/// Grid search over phi (first phase fixed) and theta with each user on its
/// best pattern; min-rate or (T/K) sum-rate score. Feasible only for a few
/// free phases.
double grid_best_profile(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                         Objective objective, double total_time, int steps);

/// max over unit-modulus x of |c^H x|^2 = (sum |c_m|)^2.
double alignment_max(const CVec& c);

}  // namespace mis::oracle

#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "mis/channel.hpp"
#include "mis/geometry.hpp"
#include "mis/rate.hpp"
#include "mis/types.hpp"

namespace mis {

struct RcgConfig {
  double grad_tol = 1e-4;
  int max_iter = 2000;
  double alpha0 = 1.0;
  double shrink = 0.5;
  double armijo_c = 1e-4;
  int max_backtracks = 30;
  double simplex_floor = 1e-12;
  double p_weight = 1.0;   // element-wise problem: weight of the binary-promoting term
  double q_weight = 1.0;   // element-wise problem: weight of the overlap penalty
  int starts = 1;          // block-level problem: random starts, best kept
  double total_time = 100.0;
};

void validate_rcg_config(const RcgConfig& cfg);

/// Which sums of a simplex block equal one.
enum class SimplexAxis { kRows, kCols };

/// A point of circle(M) x circle(N) x (simplex blocks). The blocks are the
/// K x U schedule (row simplices) or the per-user M x N placements (column
/// simplices).
struct ManifoldPoint {
  CVec phi;
  CVec theta;
  std::vector<RMat> blocks;
};

/// Same layout as ManifoldPoint; also used for Euclidean gradients.
struct TangentVector {
  CVec phi;
  CVec theta;
  std::vector<RMat> blocks;
};

/// Real inner product Re<a, b> summed over all components.
double inner(const TangentVector& a, const TangentVector& b);

TangentVector riemannian_grad(const ManifoldPoint& x, const TangentVector& egrad, SimplexAxis axis);

/// Polak-Ribiere (clamped at zero) ascent direction per component, with the
/// previous gradient and direction transported by tangent projection on the
/// circles and the identity on the simplices. Components whose direction is
/// not an ascent direction restart from the gradient.
TangentVector conjugate_direction(const ManifoldPoint& x, const TangentVector& grad,
                                  const TangentVector& grad_prev, const TangentVector& dir_prev);

/// Circle entries are renormalized (an entry that vanishes keeps its previous
/// value); simplex blocks are projected, floored at `floor` and renormalized.
ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& dir, double step,
                      SimplexAxis axis, double floor);

/// Stationarity used for stopping: norm of the circle Riemannian gradients
/// combined with the projected-gradient mapping of the simplex blocks.
double stationarity(const ManifoldPoint& x, const TangentVector& egrad, SimplexAxis axis,
                    double floor);

/// A smooth objective on the product manifold. `value_grad` returns the value
/// and writes the Euclidean gradient 2 df/dx* (circles) and df/dX (blocks).
struct SmoothProblem {
  SimplexAxis axis = SimplexAxis::kRows;
  std::function<double(const ManifoldPoint&)> value;
  std::function<double(const ManifoldPoint&, TangentVector&)> value_grad;
};

struct RcgTraceRow {
  int iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  double wall_ms = 0.0;
};

struct RcgRun {
  ManifoldPoint point;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<RcgTraceRow> trace;
};

/// Riemannian conjugate gradient ascent with Armijo backtracking.
RcgRun rcg_maximize(const SmoothProblem& problem, ManifoldPoint start, const RcgConfig& cfg);

// ---- block-level throughput problem -------------------------------------

/// sum_k sum_u xi_ku log2(1 + v_u^H Xi_k v_u) with X = point.blocks[0].
double objective_f(const ManifoldPoint& x, const std::vector<BeamPattern>& patterns,
                   const std::vector<CMat>& Xi);

TangentVector euclidean_grads(const ManifoldPoint& x, const std::vector<BeamPattern>& patterns,
                              const std::vector<CMat>& Xi, double* value = nullptr);

struct RcgResult {
  PhaseProfile profile;
  Schedule schedule;              // binary
  ObjectiveValues objective;      // of the thresholded design
  RMat relaxed_X;
  double relaxed_value = 0.0;     // objective_f before thresholding
  double thresholded_value = 0.0; // objective_f after thresholding
  double threshold_change = 0.0;  // |relaxed - thresholded| / relaxed
  double max_fractionality = 0.0; // max_k (1 - max_u xi_ku)
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<RcgTraceRow> trace;
};

RcgResult rcg_solve_p5(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                       const RcgConfig& cfg, std::uint64_t seed);

RcgResult rcg_solve_p5_from(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                            const RcgConfig& cfg, const PhaseProfile& start, const RMat& X0);

// ---- element-wise placement problem -------------------------------------

struct PenaltyValues {
  double p = 0.0;
  double q = 0.0;
};

/// p = sum (1/N)(S - 1/2)^2 and q = sum_m (max(row sum, 1) - 1)^2 over all users.
PenaltyValues penalties_pq(const std::vector<RMat>& S);

/// sum_k log2(1 + v_k^H Xi_k v_k) + p_weight p - q_weight q with
/// v_k = phi .* (S_k theta + 1 - S_k 1).
double p7_objective(const ManifoldPoint& x, const std::vector<CMat>& Xi, const RcgConfig& cfg);

TangentVector p7_euclidean_grads(const ManifoldPoint& x, const std::vector<CMat>& Xi,
                                 const RcgConfig& cfg, double* value = nullptr);

/// Column argmax, then conflicts on an MS1 slot go to the column with the
/// largest relaxed value; displaced columns take their best free slot.
/// Returns the MS1 index of every MS2 element.
std::vector<int> repair_placement(const RMat& S);

BeamPattern placement_pattern(const std::vector<int>& ms1_index, int M);

struct ElementwiseResult {
  PhaseProfile profile;
  std::vector<BeamPattern> placements;  // one per user
  ObjectiveValues objective;
  double relaxed_value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<RcgTraceRow> trace;
};

ElementwiseResult rcg_solve_p7(const ChannelStats& stats, int N, const RcgConfig& cfg,
                               std::uint64_t seed);

/// Starts from the given phases and per-user placements, each blended with
/// the uniform placement by `blend` so that it lies inside the manifold.
ElementwiseResult rcg_solve_p7_from(const ChannelStats& stats, const RcgConfig& cfg,
                                    const PhaseProfile& start,
                                    const std::vector<BeamPattern>& start_placements,
                                    double blend = 0.05);

/// Rates of per-user placements: user k is served through placements[k].
ObjectiveValues placement_objectives(const ChannelStats& stats, const PhaseProfile& profile,
                                     const std::vector<BeamPattern>& placements, double total_time);

}  // namespace mis

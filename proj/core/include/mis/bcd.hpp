#pragma once

#include <cstdint>
#include <vector>

#include "mis/channel.hpp"
#include "mis/geometry.hpp"
#include "mis/rate.hpp"
#include "mis/types.hpp"

namespace mis {

enum class Objective { kMinRate, kThroughput };

/// Solver for the convex phase subproblems over unit disks.
enum class DiskSolver { kInteriorPoint, kFirstOrder };

struct BcdConfig {
  Objective objective = Objective::kMinRate;
  double rho0 = 1e-3;
  double zeta = 5.0;
  double eps1 = 1e-4;   // inner loop: relative improvement threshold
  double eps2 = 1e-6;   // outer loop: penalty threshold
  int max_inner = 100;
  int max_outer = 15;
  double sca_tol = 1e-6;     // relative improvement that ends the SCA steps of a block
  int sca_max_iter = 1;      // SCA steps per block in each inner iteration
  double sub_tol = 1e-9;     // relative duality gap of the disk subproblem
  int sub_max_iter = 3000;
  DiskSolver subsolver = DiskSolver::kInteriorPoint;
  int starts = 1;            // random starts; bcd_solve keeps the best
  double total_time = 100.0;
};

void validate_bcd_config(const BcdConfig& cfg);

/// sum (xi - xi^2); zero iff X is binary.
double penalty_h(const RMat& X);

/// First-order lower bound -(xi_l)^2 + 2 xi_l xi of xi^2.
inline double taylor_lb_scalar(double xi, double xi_l) { return -xi_l * xi_l + 2.0 * xi_l * xi; }

struct ScheduleStep {
  RMat X;
  double mu = 0.0;         // min_k sum_u xi q (min-rate) or sum_k log2(1 + sum_u xi q)
  double surrogate = 0.0;  // value of the linearized penalized objective
};

/// Schedule block: maximizes mu - rho h_ub(X) over row-stochastic X with
/// sum_u xi_ku q_ku >= mu. The problem is concave in mu after minimizing the
/// linear penalty per user, so it is solved exactly by a 1-D search.
ScheduleStep solve_p4_2(const RMat& q, const RMat& X_l, double rho,
                        const BcdConfig& cfg = BcdConfig{});

/// Per-(k, u) quadratic forms of the SNR in theta and in phi.
struct QuadraticForms {
  int K = 0;
  int U = 0;
  std::vector<CMat> A;          // N x N, index k * U + u
  std::vector<CVec> a;          // N
  std::vector<double> a_scalar;
  std::vector<CMat> B;          // M x M

  int at(int k, int u) const { return k * U + u; }
};

QuadraticForms build_quadratic_forms(const std::vector<BeamPattern>& patterns,
                                     const std::vector<CMat>& Xi, const PhaseProfile& profile);

struct DiskSolution {
  CVec x;
  double value = 0.0;       // min_k Re{g_k^H x} + d_k
  double upper_bound = 0.0; // dual bound on the optimum
  int iterations = 0;
};

/// max_x min_k Re{g_k^H x} + d_k subject to |x_m| <= 1. Solved through the dual
/// min over the simplex of sum_m |sum_k lambda_k g_km| + lambda . d with a
/// smoothed accelerated projected gradient. Never returns a point worse than
/// `start`.
DiskSolution maxmin_affine_disk(const std::vector<CVec>& g, const RVec& d, const CVec& start,
                                double tol, int max_iter);

/// sum_k log2(1 + Re{g_k^H x} + d_k) subject to |x_m| <= 1, by accelerated
/// projected gradient with backtracking. Never returns a point worse than `start`.
DiskSolution sumlog_affine_disk(const std::vector<CVec>& g, const RVec& d, const CVec& start,
                                double tol, int max_iter);

/// Log-barrier interior-point versions of the two disk problems (Newton steps
/// on the real and imaginary parts, barrier weight grown tenfold per stage).
/// `max_iter` caps the total number of Newton steps. Never return a point
/// worse than `start`.
DiskSolution maxmin_affine_disk_ip(const std::vector<CVec>& g, const RVec& d, const CVec& start,
                                   double tol, int max_iter);
DiskSolution sumlog_affine_disk_ip(const std::vector<CVec>& g, const RVec& d, const CVec& start,
                                   double tol, int max_iter);

/// Phase block for phi (MS1) with schedule X fixed: up to `sca_max_iter`
/// solves of the linearized problem, each linearized at the previous result.
CVec solve_p4_4(const std::vector<BeamPattern>& patterns, const std::vector<CMat>& Xi,
                const RMat& X, const PhaseProfile& profile_l, const BcdConfig& cfg = BcdConfig{});

/// Phase block for theta (MS2); mirrors solve_p4_4.
CVec solve_p4_5(const std::vector<BeamPattern>& patterns, const std::vector<CMat>& Xi,
                const RMat& X, const PhaseProfile& profile_l, const BcdConfig& cfg = BcdConfig{});

/// Block objective for a relaxed point: min_k sum_u xi q (min-rate mode) or
/// sum_k log2(1 + sum_u xi q) (throughput mode).
double bcd_block_objective(const RMat& q, const RMat& X, Objective objective);

struct BcdTraceRow {
  int outer = 0;
  int inner = 0;
  double rho = 0.0;
  double mu = 0.0;
  double h = 0.0;
  double wall_ms = 0.0;
};

struct BcdResult {
  PhaseProfile profile;        // unit modulus
  Schedule schedule;           // binary
  ObjectiveValues objective;   // Jensen rates of the final design
  double relaxed_mu = 0.0;     // block objective before thresholding and projection
  double final_h = 0.0;        // penalty before thresholding
  double relaxation_change = 0.0;  // max_k relative SNR change caused by the unit-modulus projection
  int iterations = 0;          // inner iterations summed over outer iterations
  bool converged = false;
  std::vector<BcdTraceRow> trace;
};

/// Penalty-assisted BCD with SCA phase blocks. Random initial phases come from
/// `seed`; with cfg.starts > 1 the best of that many starts is returned
/// (iterations are summed over starts).
BcdResult bcd_solve(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                    const BcdConfig& cfg, std::uint64_t seed);

/// Same, from a given starting profile and schedule.
BcdResult bcd_solve_from(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                         const BcdConfig& cfg, const PhaseProfile& start, const RMat& X0);

}  // namespace mis

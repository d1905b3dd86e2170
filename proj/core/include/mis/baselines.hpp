#pragma once

#include <cstdint>
#include <vector>

#include "mis/bcd.hpp"
#include "mis/channel.hpp"
#include "mis/geometry.hpp"
#include "mis/manifold.hpp"
#include "mis/rate.hpp"
#include "mis/types.hpp"

namespace mis {

/// Scores a profile the way the heuristic baselines do: every user takes its
/// best pattern (lowest index on ties), then min-rate or (T/K) sum of rates.
struct GreedyScore {
  Schedule schedule;
  ObjectiveValues values;
  double score = 0.0;
};

GreedyScore greedy_schedule(const RMat& rates, Objective objective, double total_time);

struct QuantizedSearchConfig {
  int bits_phi = 2;
  int bits_theta = 2;
  int group_phi = 1;     // elements sharing one quantized phase
  int group_theta = 1;
  long c_max = 100000;   // enumerate when the combination count fits, sample otherwise
  Objective objective = Objective::kMinRate;
  double total_time = 100.0;
};

void validate_quantized_config(const QuantizedSearchConfig& cfg);

struct SearchResult {
  PhaseProfile profile;
  Schedule schedule;
  ObjectiveValues objective;
  double score = 0.0;
  long evaluated = 0;
  double combinations = 0.0;  // total size of the quantized space
  bool sampled = false;
};

/// Quantized phase level b of 2^bits: exp(j 2 pi b / 2^bits), b = 1..2^bits.
cplx quantized_phase(int level, int bits);

/// Expands per-group levels into a phase vector of `length` elements, grouping
/// contiguous row-major runs of `group` elements.
CVec expand_groups(const std::vector<int>& levels, int bits, int group, Eigen::Index length);

SearchResult quantized_search(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                              const QuantizedSearchConfig& cfg, std::uint64_t seed, int workers = 1);

struct PsoConfig {
  int swarm = 50;
  int iterations = 300;
  double inertia = 0.7;
  double cognitive = 1.5;
  double social = 1.5;
  Objective objective = Objective::kMinRate;
  double total_time = 100.0;
};

void validate_pso_config(const PsoConfig& cfg);

/// mod(a + pi, 2 pi) - pi, landing in [-pi, pi).
double wrap_angle(double a);

struct PsoResult {
  PhaseProfile profile;
  Schedule schedule;
  ObjectiveValues objective;
  double score = 0.0;
  std::vector<double> trace;  // global best score after each iteration
};

PsoResult pso_solve(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                    const PsoConfig& cfg, std::uint64_t seed);

enum class SingleLayerSolver { kBcd, kRcg };

struct SingleLayerResult {
  CVec phi;
  ObjectiveValues objective;
  int iterations = 0;
  bool converged = false;
};

/// The selected solver on the surface without a movable layer (v = phi, U = 1).
SingleLayerResult single_layer_baseline(const ChannelStats& stats, SingleLayerSolver solver,
                                        std::uint64_t seed, const BcdConfig& bcd = BcdConfig{},
                                        const RcgConfig& rcg = RcgConfig{});

struct DynamicResult {
  std::vector<CVec> v;   // per-user phase vector
  RVec snr;
  ObjectiveValues objective;
};

/// Per-user maximization of v^H Xi_k v over unit-modulus v by circle-manifold
/// RCG; best of `starts` random starts per user.
DynamicResult dynamic_ris_baseline(const ChannelStats& stats, std::uint64_t seed,
                                   const RcgConfig& rcg = RcgConfig{}, int starts = 5);

}  // namespace mis

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mis/baselines.hpp"
#include "mis/bcd.hpp"
#include "mis/channel.hpp"
#include "mis/geometry.hpp"
#include "mis/manifold.hpp"

namespace mis {

enum class Scheme { kBcd, kRcg, kRcgElementwise, kPso, kQsearch, kSingle, kDynamic };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

enum class SweepAxis { kNone, kPower, kUsers, kMs1Cols, kKappa, kAllocation, kMs2Size };

std::string axis_name(SweepAxis a);
SweepAxis parse_axis(const std::string& name);

enum class RobustnessFamily {
  kLocationGaussian,
  kLocationBounded,
  kCsiMix,
  kCsiBounded,
  kPhaseGaussian,
  kPhaseBounded
};

std::string family_name(RobustnessFamily f);
RobustnessFamily parse_family(const std::string& name);

struct UserPlacement {
  int count = 6;
  double elevation = -kPi / 4.0;
  double azimuth_min = 0.0;
  double azimuth_max = kPi / 3.0;
  double distance = 20.0;
  bool random = false;
  std::vector<UserGeometry> explicit_users;  // overrides the rule when non-empty
};

struct RobustnessSpec {
  RobustnessFamily family = RobustnessFamily::kCsiMix;
  std::vector<double> magnitudes{0.0, 0.1, 0.2, 0.3};
  long trials = 2000;
  Scheme design = Scheme::kRcg;
};

struct Scenario {
  LayoutConfig layout;
  ChannelConfig channel;  // `users` is filled by build_instance
  UserPlacement users;
  double total_time = 100.0;
  Objective objective = Objective::kMinRate;
  std::vector<Scheme> schemes{Scheme::kBcd};
  SweepAxis axis = SweepAxis::kNone;
  std::vector<double> sweep_values;
  std::vector<std::uint64_t> seeds{1};
  BcdConfig bcd;
  RcgConfig rcg;
  PsoConfig pso;
  QuantizedSearchConfig qsearch;
  int dynamic_starts = 5;
  bool elementwise_warm_start = true;
  bool timing = false;  // record CPU time per solve (otherwise wall_ms is written as 0)
  bool has_robustness = false;
  RobustnessSpec robustness;
};

/// Parses a scenario, collecting every problem before throwing one
/// ConfigError that lists them all.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

/// The fully resolved scenario, defaults included.
nlohmann::json scenario_to_json(const Scenario& s);

/// Checks cross-field invariants (layout, solver settings, sweep values).
void validate_scenario(const Scenario& s);

/// Scenario with one sweep value applied.
Scenario apply_sweep_value(const Scenario& s, double value);

struct Instance {
  MisLayout layout;
  ChannelStats stats;
  std::vector<BeamPattern> patterns;
  std::vector<UserGeometry> users;
};

Instance build_instance(const Scenario& s, std::uint64_t seed);

}  // namespace mis

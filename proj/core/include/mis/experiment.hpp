#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mis/rate.hpp"
#include "mis/scenario.hpp"

namespace mis {

/// One CSV row: a scheme evaluated at one sweep value and seed.
struct ResultRow {
  std::string scheme;
  std::string sweep_axis;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  double objective = 0.0;  // the value the scheme optimizes (min-rate or throughput)
  double min_rate = 0.0;
  double throughput = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;    // CPU time of the solve when timing is enabled, else 0
  bool converged = false;
  std::string notes;       // `key=value` pairs separated by ';'
};

/// CSV header shared by every result file.
extern const char* const kCsvHeader;

/// Result of one scheme on one instance.
ResultRow run_scheme(Scheme scheme, const Scenario& s, const Instance& inst, std::uint64_t seed);

/// Every scheme at every sweep value and seed. Rows are ordered by sweep
/// value, then seed, then the scheme order of the scenario; the order and the
/// values do not depend on `workers`.
std::vector<ResultRow> run_sweep(const Scenario& s, int workers = 1);

/// A design frozen for robustness evaluation: phases and each user's pattern.
struct FrozenDesign {
  PhaseProfile profile;
  std::vector<int> assignment;  // pattern index per user
  int iterations = 0;
  bool converged = false;
};

FrozenDesign design_for_robustness(Scheme scheme, const Scenario& s, const Instance& inst,
                                   std::uint64_t seed);

/// Per-user ergodic rates of a frozen design under one error family and
/// magnitude. Every magnitude uses the same channel and error draws (common
/// random numbers), so magnitude 0 reproduces the error-free evaluation.
std::vector<double> perturbed_rates(const Instance& inst, const FrozenDesign& design,
                                    RobustnessFamily family,
                                    double magnitude, long trials, std::uint64_t seed);

/// Degradation 1 - throughput(magnitude) / throughput(0) for each magnitude of
/// the scenario's robustness block, per seed.
std::vector<ResultRow> run_robustness(const Scenario& s, int workers = 1);

/// Creates `dir` and checks that it is writable; throws IoError otherwise.
void prepare_output_dir(const std::string& dir);

std::string format_row(const ResultRow& row);

/// Writes `results.csv` and `manifest.json` into `dir`.
void emit_results(const std::vector<ResultRow>& rows, const std::string& dir,
                  const nlohmann::json& manifest);

nlohmann::json make_manifest(const Scenario& s, const std::string& command, int workers);

}  // namespace mis

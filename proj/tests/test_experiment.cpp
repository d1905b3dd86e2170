#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mis/experiment.hpp"

namespace {

using namespace mis;
using nlohmann::json;
namespace fs = std::filesystem;

Scenario tiny(json extra = json::object()) {
  json j = {{"layout", {{"ms1_rows", 2}, {"ms1_cols", 2}, {"ms2_rows", 1}, {"ms2_cols", 1}, {"bs_antennas", 2}}},
            {"users", {{"count", 2}}},
            {"schemes", {"rcg", "single"}},
            {"seeds", {1, 2}}};
  j.merge_patch(extra);
  return parse_scenario(j);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double degradation(const ResultRow& r) {
  const auto at = r.notes.find("degradation=");
  return std::stod(r.notes.substr(at + 12));
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mis_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Sweep, Cardinality) {
  const auto rows = run_sweep(tiny({{"sweep", {{"axis", "power_dbm"}, {"values", {20, 25, 30}}}}}));
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0].sweep_value, 20.0);
  EXPECT_EQ(rows[0].seed, 1u);
  EXPECT_EQ(rows[0].scheme, "rcg");
  EXPECT_EQ(rows[1].scheme, "single");
  EXPECT_EQ(rows[11].sweep_value, 30.0);
}

TEST(Sweep, NoAxisIsOnePoint) {
  const auto rows = run_sweep(tiny({{"seeds", {7}}, {"schemes", {"single"}}}));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].sweep_axis, "none");
  EXPECT_GT(rows[0].min_rate, 0.0);
  EXPECT_EQ(rows[0].wall_ms, 0.0);
}

TEST(Sweep, WorkersDoNotChangeRows) {
  const Scenario s = tiny({{"sweep", {{"axis", "power_dbm"}, {"values", {20, 30}}}}});
  const auto a = run_sweep(s, 1);
  const auto b = run_sweep(s, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(format_row(a[i]), format_row(b[i]));
}

TEST(Emit, ByteIdenticalReruns) {
  const Scenario s = tiny();
  const fs::path a = scratch("a"), b = scratch("b");
  prepare_output_dir(a.string());
  prepare_output_dir(b.string());
  emit_results(run_sweep(s), a.string(), make_manifest(s, "sweep", 1));
  emit_results(run_sweep(s), b.string(), make_manifest(s, "sweep", 1));
  EXPECT_EQ(slurp(a / "results.csv"), slurp(b / "results.csv"));
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Emit, EmptyTableWritesHeader) {
  const fs::path d = scratch("empty");
  prepare_output_dir(d.string());
  emit_results({}, d.string(), make_manifest(tiny(), "sweep", 1));
  EXPECT_EQ(slurp(d / "results.csv"), std::string(kCsvHeader) + "\n");
  const json m = json::parse(slurp(d / "manifest.json"));
  EXPECT_TRUE(m.contains("config"));
  fs::remove_all(d);
}

TEST(Emit, UnwritableDirectoryFailsEarly) {
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "file";
  EXPECT_THROW(prepare_output_dir((blocker / "sub").string()), IoError);
  fs::remove(blocker);
}

TEST(Robustness, ZeroMagnitudeIsExact) {
  for (const char* family : {"csi_mix", "csi_bounded", "phase_gaussian", "phase_bounded",
                             "location_gaussian", "location_bounded"}) {
    const Scenario s = tiny({{"seeds", {1}},
                             {"robustness", {{"family", family}, {"magnitudes", {0.0, 0.3}}, {"trials", 200}}}});
    const auto rows = run_robustness(s);
    ASSERT_EQ(rows.size(), 2u) << family;
    EXPECT_EQ(degradation(rows[0]), 0.0) << family;
    EXPECT_GE(degradation(rows[1]), 0.0) << family;
  }
}

TEST(Robustness, PerturbedRatesAreDeterministic) {
  const Scenario s = tiny({{"seeds", {1}}});
  const Instance inst = build_instance(s, 1);
  const FrozenDesign d = design_for_robustness(Scheme::kRcg, s, inst, 1);
  const auto a = perturbed_rates(inst, d, RobustnessFamily::kPhaseGaussian, 0.0, 300, 9);
  const auto b = perturbed_rates(inst, d, RobustnessFamily::kPhaseGaussian, 0.0, 300, 9);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a, b);
}

}  // namespace

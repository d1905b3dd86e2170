#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mis/experiment.hpp"
#include "mis/random.hpp"
#include "mis/scenario.hpp"
#include "oracles.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::string seeds;
  std::string scheme;
  int workers = 1;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw mis::ConfigError("--seeds: '" + item + "' is not a nonnegative integer");
    out.push_back(v);
  }
  if (out.empty()) throw mis::ConfigError("--seeds: no seeds given");
  return out;
}

mis::Scenario load(const Options& o) {
  mis::Scenario s = mis::load_scenario(o.config);
  if (!o.seeds.empty()) s.seeds = parse_seeds(o.seeds);
  if (!o.scheme.empty()) {
    s.schemes = {mis::parse_scheme(o.scheme)};
    if (s.has_robustness) s.robustness.design = s.schemes.front();
  }
  mis::validate_scenario(s);
  return s;
}

std::string command_line(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

int run_sweep_cmd(const Options& o, const std::string& cmd) {
  const mis::Scenario s = load(o);
  mis::prepare_output_dir(o.out);
  const auto rows = mis::run_sweep(s, o.workers);
  mis::emit_results(rows, o.out, mis::make_manifest(s, cmd, o.workers));
  std::cout << "wrote " << rows.size() << " rows to " << o.out << "/results.csv\n";
  return 0;
}

int run_robustness_cmd(const Options& o, const std::string& cmd) {
  const mis::Scenario s = load(o);
  if (!s.has_robustness) throw mis::ConfigError("robustness: the configuration has no 'robustness' block");
  mis::prepare_output_dir(o.out);
  const auto rows = mis::run_robustness(s, o.workers);
  mis::emit_results(rows, o.out, mis::make_manifest(s, cmd, o.workers));
  std::cout << "wrote " << rows.size() << " rows to " << o.out << "/results.csv\n";
  return 0;
}

int run_validate_cmd(const Options& o) {
  const mis::Scenario s = load(o);
  std::cout << mis::scenario_to_json(s).dump(2) << "\n";
  return 0;
}

// Runs the reference checks on the scenario's instance for every seed:
// Monte Carlo SNR against v^H Xi v, and, when the quantized space is small,
// exhaustive enumeration against quantized_search.
int run_oracle_cmd(const Options& o, const std::string& cmd) {
  const mis::Scenario s = load(o);
  mis::prepare_output_dir(o.out);
  constexpr long kTrials = 20000;
  constexpr long kExhaustiveLimit = 1L << 16;
  std::ofstream csv(o.out + "/oracle.csv", std::ios::binary);
  if (!csv) throw mis::IoError("cannot open " + o.out + "/oracle.csv");
  csv << "check,seed,user,library,oracle,rel_error,within_tolerance\n";
  auto line = [&](const char* check, std::uint64_t seed, int user, double lib, double ref,
                  bool ok) {
    const double rel = std::abs(lib - ref) / std::max(std::abs(ref), 1e-300);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%llu,%d,%.10g,%.10g,%.3e,%s\n", check,
                  static_cast<unsigned long long>(seed), user, lib, ref, rel, ok ? "true" : "false");
    csv << buf;
  };
  int failures = 0;
  for (std::uint64_t seed : s.seeds) {
    const mis::Instance inst = mis::build_instance(s, seed);
    mis::Rng rng(mis::derive_seed(seed, 0x4f5241434c45ULL));
    const mis::CVec v = mis::random_unit_modulus(rng, inst.stats.M());
    for (int k = 0; k < inst.stats.K(); ++k) {
      const double lib = mis::statistical_snr(v, inst.stats.Xi[static_cast<std::size_t>(k)]);
      const auto mc = mis::oracle::mc_snr_mean(inst.stats, v, k, kTrials,
                                               mis::derive_seed(seed, 100 + static_cast<std::uint64_t>(k)));
      const bool ok = std::abs(lib - mc.mean) <= 4.0 * mc.std_error;
      failures += ok ? 0 : 1;
      line("xi_monte_carlo", seed, k, lib, mc.mean, ok);
    }
    const int M = inst.stats.M(), N = inst.patterns.front().N();
    const double space = std::pow(2.0, s.qsearch.bits_phi * M + s.qsearch.bits_theta * N);
    if (s.qsearch.group_phi == 1 && s.qsearch.group_theta == 1 && space <= kExhaustiveLimit) {
      mis::QuantizedSearchConfig q = s.qsearch;
      q.c_max = std::max<long>(q.c_max, kExhaustiveLimit);
      const auto lib = mis::quantized_search(inst.stats, inst.patterns, q, seed, o.workers);
      const auto ref = mis::oracle::exhaustive_quantized(inst.stats, inst.patterns, q.bits_phi,
                                                        q.bits_theta, q.objective, q.total_time);
      const bool ok = std::abs(lib.score - ref.score) <= 1e-12 * std::max(1.0, std::abs(ref.score));
      failures += ok ? 0 : 1;
      line("quantized_exhaustive", seed, -1, lib.score, ref.score, ok);
    }
  }
  nlohmann::json manifest = mis::make_manifest(s, cmd, o.workers);
  manifest["outputs"] = {"oracle.csv", "manifest.json"};
  std::ofstream(o.out + "/manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
  std::cout << "wrote " << o.out << "/oracle.csv (" << failures << " checks outside tolerance)\n";
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Movable intelligent surface experiments"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", o.config, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
    if (with_out) sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--seeds", o.seeds, "comma-separated seeds overriding the configuration");
    sub->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
    sub->add_option("--scheme", o.scheme,
                    "run only this scheme: bcd|rcg|rcg-elementwise|pso|qsearch|single|dynamic");
  };
  auto* sweep = app.add_subcommand("sweep", "run every scheme over the sweep values and seeds");
  auto* robust = app.add_subcommand("robustness", "degradation of a frozen design under errors");
  auto* validate = app.add_subcommand("validate-config", "check a configuration and print it resolved");
  auto* oracle = app.add_subcommand("oracle", "run the brute-force and Monte Carlo reference checks");
  add_common(sweep, true);
  add_common(robust, true);
  add_common(validate, false);
  add_common(oracle, true);

  CLI11_PARSE(app, argc, argv);
  const std::string cmd = command_line(argc, argv);
  try {
    if (sweep->parsed()) return run_sweep_cmd(o, cmd);
    if (robust->parsed()) return run_robustness_cmd(o, cmd);
    if (validate->parsed()) return run_validate_cmd(o);
    if (oracle->parsed()) return run_oracle_cmd(o, cmd);
  } catch (const mis::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mis::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "mis/experiment.hpp"

#include <time.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mis/parallel.hpp"
#include "mis/random.hpp"

namespace mis {

namespace fs = std::filesystem;

const char* const kCsvHeader =
    "scheme,sweep_axis,sweep_value,seed,objective_bits_hz,min_rate,throughput,iters,wall_ms,"
    "converged,notes";

namespace {

// Stream ids keep the solvers of one seed independent of each other.
enum Stream : std::uint64_t {
  kStreamBcd = 1,
  kStreamRcg = 2,
  kStreamElementwise = 3,
  kStreamPso = 4,
  kStreamSearch = 5,
  kStreamSingle = 6,
  kStreamDynamic = 7,
  kStreamRobustness = 8,
};

double thread_cpu_ms() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return 1e3 * static_cast<double>(ts.tv_sec) + 1e-6 * static_cast<double>(ts.tv_nsec);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double pick(Objective o, const ObjectiveValues& v) {
  return o == Objective::kMinRate ? v.min_rate : v.throughput;
}

std::vector<BeamPattern> assigned_patterns(const Instance& inst, const Schedule& schedule) {
  std::vector<BeamPattern> out;
  for (int k = 0; k < schedule.K(); ++k)
    out.push_back(inst.patterns[static_cast<std::size_t>(schedule.assigned(k))]);
  return out;
}

std::vector<int> assignment_of(const Schedule& schedule) {
  std::vector<int> out;
  for (int k = 0; k < schedule.K(); ++k) out.push_back(schedule.assigned(k));
  return out;
}

ObjectiveValues from_rates(const std::vector<double>& rates, double total_time) {
  ObjectiveValues v;
  double sum = 0.0;
  v.min_rate = rates.empty() ? 0.0 : rates.front();
  for (double r : rates) {
    sum += r;
    v.min_rate = std::min(v.min_rate, r);
  }
  v.throughput = rates.empty() ? 0.0 : total_time / static_cast<double>(rates.size()) * sum;
  return v;
}

}  // namespace

ResultRow run_scheme(Scheme scheme, const Scenario& s, const Instance& inst, std::uint64_t seed) {
  ResultRow row;
  row.scheme = scheme_name(scheme);
  row.seed = seed;
  const ChannelStats& stats = inst.stats;
  const double t0 = thread_cpu_ms();
  std::ostringstream notes;
  ObjectiveValues values;
  Objective optimized = s.objective;

  switch (scheme) {
    case Scheme::kBcd: {
      const BcdResult r = bcd_solve(stats, inst.patterns, s.bcd, derive_seed(seed, kStreamBcd));
      values = r.objective;
      row.iterations = r.iterations;
      row.converged = r.converged;
      notes << "h=" << num(r.final_h) << ";relax_change=" << num(r.relaxation_change);
      break;
    }
    case Scheme::kRcg: {
      const RcgResult r = rcg_solve_p5(stats, inst.patterns, s.rcg, derive_seed(seed, kStreamRcg));
      values = r.objective;
      optimized = Objective::kThroughput;
      row.iterations = r.iterations;
      row.converged = r.converged;
      notes << "fractionality=" << num(r.max_fractionality)
            << ";threshold_change=" << num(r.threshold_change);
      break;
    }
    case Scheme::kRcgElementwise: {
      optimized = Objective::kThroughput;
      if (inst.layout.N() == 0) {
        const RcgResult r = rcg_solve_p5(stats, inst.patterns, s.rcg, derive_seed(seed, kStreamRcg));
        values = r.objective;
        row.iterations = r.iterations;
        row.converged = r.converged;
        notes << "start=none;no_ms2";
        break;
      }
      ElementwiseResult best =
          rcg_solve_p7(stats, inst.layout.N(), s.rcg, derive_seed(seed, kStreamElementwise));
      std::string start = "cold";
      int iterations = best.iterations;
      if (s.elementwise_warm_start) {
        const RcgResult block =
            rcg_solve_p5(stats, inst.patterns, s.rcg, derive_seed(seed, kStreamRcg));
        ElementwiseResult warm =
            rcg_solve_p7_from(stats, s.rcg, block.profile, assigned_patterns(inst, block.schedule));
        iterations += block.iterations + warm.iterations;
        if (warm.objective.throughput > best.objective.throughput) {
          best = std::move(warm);
          start = "warm";
        }
      }
      values = best.objective;
      row.iterations = iterations;
      row.converged = best.converged;
      notes << "start=" << start;
      break;
    }
    case Scheme::kPso: {
      const PsoResult r = pso_solve(stats, inst.patterns, s.pso, derive_seed(seed, kStreamPso));
      values = r.objective;
      row.iterations = s.pso.iterations;
      row.converged = true;
      break;
    }
    case Scheme::kQsearch: {
      const SearchResult r =
          quantized_search(stats, inst.patterns, s.qsearch, derive_seed(seed, kStreamSearch), 1);
      values = r.objective;
      row.iterations = static_cast<int>(std::min<long>(r.evaluated, 2147483647L));
      row.converged = !r.sampled;
      notes << "evaluated=" << r.evaluated << ";sampled=" << (r.sampled ? 1 : 0);
      break;
    }
    case Scheme::kSingle: {
      const SingleLayerSolver solver =
          s.objective == Objective::kMinRate ? SingleLayerSolver::kBcd : SingleLayerSolver::kRcg;
      const SingleLayerResult r = single_layer_baseline(stats, solver, derive_seed(seed, kStreamSingle),
                                                        s.bcd, s.rcg);
      values = r.objective;
      row.iterations = r.iterations;
      row.converged = r.converged;
      notes << "solver=" << (solver == SingleLayerSolver::kBcd ? "bcd" : "rcg");
      break;
    }
    case Scheme::kDynamic: {
      const DynamicResult r =
          dynamic_ris_baseline(stats, derive_seed(seed, kStreamDynamic), s.rcg, s.dynamic_starts);
      values = r.objective;
      row.converged = true;
      notes << "starts=" << s.dynamic_starts;
      break;
    }
  }

  row.objective = pick(optimized, values);
  row.min_rate = values.min_rate;
  row.throughput = values.throughput;
  row.wall_ms = s.timing ? thread_cpu_ms() - t0 : 0.0;
  row.notes = notes.str();
  return row;
}

std::vector<ResultRow> run_sweep(const Scenario& s, int workers) {
  validate_scenario(s);
  const std::vector<double> values =
      s.axis == SweepAxis::kNone ? std::vector<double>{0.0} : s.sweep_values;
  const long tasks = static_cast<long>(values.size() * s.seeds.size());
  std::vector<std::vector<ResultRow>> out(static_cast<std::size_t>(tasks));
  parallel_for(tasks, workers, [&](long i) {
    const std::size_t vi = static_cast<std::size_t>(i) / s.seeds.size();
    const std::size_t si = static_cast<std::size_t>(i) % s.seeds.size();
    const Scenario t = apply_sweep_value(s, values[vi]);
    const std::uint64_t seed = s.seeds[si];
    const Instance inst = build_instance(t, seed);
    auto& rows = out[static_cast<std::size_t>(i)];
    for (Scheme scheme : s.schemes) {
      ResultRow row;
      try {
        row = run_scheme(scheme, t, inst, seed);
      } catch (const Error& e) {
        // A failing solve is recorded and the sweep continues.
        row.scheme = scheme_name(scheme);
        row.seed = seed;
        row.objective = row.min_rate = row.throughput = std::nan("");
        row.converged = false;
        std::string what = e.what();
        for (char& c : what)
          if (c == ',' || c == '\n') c = ' ';
        row.notes = "error=" + what;
      }
      row.sweep_axis = axis_name(s.axis);
      row.sweep_value = values[vi];
      rows.push_back(std::move(row));
    }
  });
  std::vector<ResultRow> flat;
  for (auto& rows : out)
    for (auto& r : rows) flat.push_back(std::move(r));
  return flat;
}

FrozenDesign design_for_robustness(Scheme scheme, const Scenario& s, const Instance& inst,
                                   std::uint64_t seed) {
  FrozenDesign d;
  switch (scheme) {
    case Scheme::kBcd: {
      const BcdResult r = bcd_solve(inst.stats, inst.patterns, s.bcd, derive_seed(seed, kStreamBcd));
      d.profile = r.profile;
      d.assignment = assignment_of(r.schedule);
      d.iterations = r.iterations;
      d.converged = r.converged;
      break;
    }
    case Scheme::kRcg: {
      const RcgResult r =
          rcg_solve_p5(inst.stats, inst.patterns, s.rcg, derive_seed(seed, kStreamRcg));
      d.profile = r.profile;
      d.assignment = assignment_of(r.schedule);
      d.iterations = r.iterations;
      d.converged = r.converged;
      break;
    }
    case Scheme::kPso: {
      const PsoResult r = pso_solve(inst.stats, inst.patterns, s.pso, derive_seed(seed, kStreamPso));
      d.profile = r.profile;
      d.assignment = assignment_of(r.schedule);
      d.iterations = s.pso.iterations;
      d.converged = true;
      break;
    }
    case Scheme::kQsearch: {
      const SearchResult r =
          quantized_search(inst.stats, inst.patterns, s.qsearch, derive_seed(seed, kStreamSearch), 1);
      d.profile = r.profile;
      d.assignment = assignment_of(r.schedule);
      d.converged = !r.sampled;
      break;
    }
    default:
      throw ConfigError("robustness design must be bcd, rcg, pso or qsearch");
  }
  return d;
}

std::vector<double> perturbed_rates(const Instance& inst, const FrozenDesign& design, RobustnessFamily family,
                                    double magnitude, long trials, std::uint64_t seed) {
  const ChannelStats& st = inst.stats;
  const int K = st.K();
  const int M = st.M();
  const int L = st.L();
  const Eigen::Index N = design.profile.theta.size();
  if (static_cast<int>(design.assignment.size()) != K)
    throw ShapeError("perturbed_rates: one pattern per user required");
  if (static_cast<int>(inst.users.size()) != K)
    throw ShapeError("perturbed_rates: user geometry missing");
  if (!(magnitude >= 0.0)) throw DomainError("perturbed_rates: magnitude must be >= 0");
  if (trials <= 0) throw DomainError("perturbed_rates: trials must be positive");

  auto weights = [](double beta) {
    if (std::isinf(beta)) return std::pair<double, double>{1.0, 0.0};
    return std::pair<double, double>{beta / (beta + 1.0), 1.0 / (beta + 1.0)};
  };
  const auto [los1, nlos1] = weights(st.beta1);

  std::vector<Vec3> user_pos(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const auto& u = inst.users[static_cast<std::size_t>(k)];
    const double el = u.direction.elevation, az = u.direction.azimuth;
    user_pos[static_cast<std::size_t>(k)] =
        u.distance * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
  }

  std::vector<double> sums(static_cast<std::size_t>(K), 0.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (long t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    CMat Sigma(M, L);
    for (int l = 0; l < L; ++l)
      for (int m = 0; m < M; ++m) Sigma(m, l) = complex_normal(rng);
    const CMat G = std::sqrt(st.alpha1) *
                   (std::sqrt(los1) * st.G_bar + std::sqrt(nlos1) * (st.S_mr_sqrt * Sigma * st.S_b_sqrt));

    // Phase errors are shared by all users: the surfaces are common.
    CVec phi = design.profile.phi;
    CVec theta = design.profile.theta;
    if (family == RobustnessFamily::kPhaseGaussian) {
      for (Eigen::Index n = 0; n < N; ++n) theta(n) *= std::polar(1.0, magnitude * gauss(rng));
    } else if (family == RobustnessFamily::kPhaseBounded) {
      for (Eigen::Index m = 0; m < phi.size(); ++m)
        phi(m) *= std::polar(1.0, magnitude * (2.0 * unit(rng) - 1.0));
      for (Eigen::Index n = 0; n < N; ++n)
        theta(n) *= std::polar(1.0, magnitude * (2.0 * unit(rng) - 1.0));
    }

    for (int k = 0; k < K; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const auto [los2, nlos2] = weights(st.beta2[ks]);
      CVec h_los = st.h_bar[ks];
      if (family == RobustnessFamily::kLocationGaussian ||
          family == RobustnessFamily::kLocationBounded) {
        Vec3 delta(gauss(rng), gauss(rng), gauss(rng));
        if (family == RobustnessFamily::kLocationGaussian) {
          delta *= magnitude;
        } else {
          // Uniform in the ball of radius `magnitude`.
          const double norm = delta.norm();
          const double radius = magnitude * std::cbrt(unit(rng));
          delta = norm > 0.0 ? Vec3(delta * (radius / norm)) : Vec3::Zero();
        }
        const Vec3 r = user_pos[ks] + delta;
        const double az = std::atan2(r.y(), r.x());
        const double el = std::asin(std::clamp(r.z() / r.norm(), -1.0, 1.0));
        h_los = steering_vector(inst.layout.ms1_positions, az, el, inst.layout.wavelength);
      }
      const CVec z = complex_normal_vector(rng, M);
      const CVec h = std::sqrt(st.alpha2[ks]) *
                     (std::sqrt(los2) * h_los + std::sqrt(nlos2) * (st.S_mt_sqrt * z));
      const BeamPattern& pat = inst.patterns[static_cast<std::size_t>(design.assignment[ks])];
      const CVec v = composite_phase(pat, theta, phi);
      const CVec c = G.adjoint() * h.cwiseProduct(v);
      double snr = st.iota[ks] * c.squaredNorm();
      if (family == RobustnessFamily::kCsiMix) {
        // The transmitter beamforms with h; the true channel is the mixture.
        const CVec err = std::sqrt(st.alpha2[ks]) * (st.S_mt_sqrt * complex_normal_vector(rng, M));
        const CVec h_true = std::sqrt(1.0 - magnitude) * h + std::sqrt(magnitude) * err;
        const CVec c_true = G.adjoint() * h_true.cwiseProduct(v);
        const double cn = c.squaredNorm();
        snr = cn > 0.0 ? st.iota[ks] * std::norm(c.dot(c_true)) / cn : 0.0;
      } else if (family == RobustnessFamily::kCsiBounded) {
        // h is the true channel; the transmitter beamforms with h + delta,
        // |delta| <= magnitude |h|.
        const CVec e = complex_normal_vector(rng, M);
        const double en = e.norm();
        const double radius = magnitude * h.norm() * unit(rng);
        const CVec h_est = en > 0.0 ? CVec(h + (radius / en) * e) : h;
        const CVec c_est = G.adjoint() * h_est.cwiseProduct(v);
        const double cn = c_est.squaredNorm();
        snr = cn > 0.0 ? st.iota[ks] * std::norm(c_est.dot(c)) / cn : 0.0;
      }
      sums[ks] += std::log2(1.0 + snr);
    }
  }
  for (double& v : sums) v /= static_cast<double>(trials);
  return sums;
}

std::vector<ResultRow> run_robustness(const Scenario& s, int workers) {
  validate_scenario(s);
  if (!s.has_robustness) throw ConfigError("robustness: the scenario has no robustness block");
  const RobustnessSpec& spec = s.robustness;
  const long tasks = static_cast<long>(s.seeds.size());
  std::vector<std::vector<ResultRow>> out(static_cast<std::size_t>(tasks));
  parallel_for(tasks, workers, [&](long i) {
    const std::uint64_t seed = s.seeds[static_cast<std::size_t>(i)];
    const Instance inst = build_instance(s, seed);
    const double t0 = thread_cpu_ms();
    const FrozenDesign design = design_for_robustness(spec.design, s, inst, seed);
    const double design_ms = thread_cpu_ms() - t0;
    const std::uint64_t eval_seed = derive_seed(seed, kStreamRobustness);
    const ObjectiveValues nominal = from_rates(
        perturbed_rates(inst, design, spec.family, 0.0, spec.trials, eval_seed), s.total_time);
    for (double magnitude : spec.magnitudes) {
      const double t1 = thread_cpu_ms();
      const ObjectiveValues v = from_rates(
          perturbed_rates(inst, design, spec.family, magnitude, spec.trials, eval_seed),
          s.total_time);
      ResultRow row;
      row.scheme = scheme_name(spec.design);
      row.sweep_axis = family_name(spec.family);
      row.sweep_value = magnitude;
      row.seed = seed;
      row.objective = v.throughput;
      row.min_rate = v.min_rate;
      row.throughput = v.throughput;
      row.iterations = design.iterations;
      row.converged = design.converged;
      row.wall_ms = s.timing ? design_ms + thread_cpu_ms() - t1 : 0.0;
      const double degradation =
          nominal.throughput > 0.0 ? 1.0 - v.throughput / nominal.throughput : 0.0;
      row.notes = "degradation=" + num(degradation) + ";trials=" + std::to_string(spec.trials);
      out[static_cast<std::size_t>(i)].push_back(std::move(row));
    }
  });
  std::vector<ResultRow> flat;
  for (auto& rows : out)
    for (auto& r : rows) flat.push_back(std::move(r));
  return flat;
}

void prepare_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f || !(f << "ok")) throw IoError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

std::string format_row(const ResultRow& r) {
  std::ostringstream os;
  os << r.scheme << ',' << r.sweep_axis << ',' << num(r.sweep_value) << ',' << r.seed << ','
     << num(r.objective) << ',' << num(r.min_rate) << ',' << num(r.throughput) << ','
     << r.iterations << ',' << num(r.wall_ms) << ',' << (r.converged ? "true" : "false") << ','
     << r.notes;
  return os.str();
}

void emit_results(const std::vector<ResultRow>& rows, const std::string& dir,
                  const nlohmann::json& manifest) {
  prepare_output_dir(dir);
  const fs::path csv = fs::path(dir) / "results.csv";
  std::ofstream f(csv);
  if (!f) throw IoError("cannot write '" + csv.string() + "'");
  f << kCsvHeader << '\n';
  for (const auto& r : rows) f << format_row(r) << '\n';
  if (!f) throw IoError("write failed for '" + csv.string() + "'");

  const fs::path man = fs::path(dir) / "manifest.json";
  std::ofstream m(man);
  if (!m) throw IoError("cannot write '" + man.string() + "'");
  m << manifest.dump(2) << '\n';
  if (!m) throw IoError("write failed for '" + man.string() + "'");
}

nlohmann::json make_manifest(const Scenario& s, const std::string& command, int workers) {
  nlohmann::json j;
  j["tool"] = "mis";
  j["version"] = MIS_VERSION_STRING;
  j["command"] = command;
  j["workers"] = workers;
  j["outputs"] = {"results.csv", "manifest.json"};
  j["csv_header"] = kCsvHeader;
  j["config"] = scenario_to_json(s);
  return j;
}

}  // namespace mis

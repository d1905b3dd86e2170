#include "mis/baselines.hpp"

#include <cmath>
#include <limits>

#include "mis/parallel.hpp"
#include "mis/random.hpp"

namespace mis {

namespace {

constexpr long kSearchChunk = 256;

struct Candidate {
  double score = -std::numeric_limits<double>::infinity();
  long index = -1;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.index < 0) return false;
  if (b.index < 0) return true;
  return a.score > b.score || (a.score == b.score && a.index < b.index);
}

}  // namespace

GreedyScore greedy_schedule(const RMat& rates, Objective objective, double total_time) {
  std::vector<int> pick(static_cast<std::size_t>(rates.rows()));
  RVec best(rates.rows());
  for (Eigen::Index k = 0; k < rates.rows(); ++k) {
    Eigen::Index u_best = 0;
    for (Eigen::Index u = 1; u < rates.cols(); ++u)
      if (rates(k, u) > rates(k, u_best)) u_best = u;
    pick[static_cast<std::size_t>(k)] = static_cast<int>(u_best);
    best(k) = rates(k, u_best);
  }
  GreedyScore out;
  out.schedule = Schedule::from_assignment(pick, static_cast<int>(rates.cols()));
  out.values.min_rate = best.minCoeff();
  out.values.throughput = total_time / static_cast<double>(rates.rows()) * best.sum();
  out.score = objective == Objective::kMinRate ? out.values.min_rate : out.values.throughput;
  return out;
}

void validate_quantized_config(const QuantizedSearchConfig& cfg) {
  if (cfg.bits_phi < 1 || cfg.bits_theta < 1 || cfg.bits_phi > 16 || cfg.bits_theta > 16)
    throw ConfigError("qsearch bit depths must lie in [1, 16]");
  if (cfg.group_phi < 1 || cfg.group_theta < 1) throw ConfigError("qsearch group sizes must be >= 1");
  if (cfg.c_max < 1) throw ConfigError("qsearch.c_max must be >= 1");
  if (!(cfg.total_time > 0)) throw ConfigError("total_time must be positive");
}

cplx quantized_phase(int level, int bits) {
  return std::polar(1.0, 2.0 * kPi * level / static_cast<double>(1 << bits));
}

CVec expand_groups(const std::vector<int>& levels, int bits, int group, Eigen::Index length) {
  CVec out(length);
  for (Eigen::Index i = 0; i < length; ++i)
    out(i) = quantized_phase(levels.at(static_cast<std::size_t>(i / group)), bits);
  return out;
}

SearchResult quantized_search(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                              const QuantizedSearchConfig& cfg, std::uint64_t seed, int workers) {
  validate_quantized_config(cfg);
  if (patterns.empty()) throw ShapeError("qsearch: no beam patterns");
  const Eigen::Index M = stats.M();
  const Eigen::Index N = patterns.front().N();
  const int groups_phi = static_cast<int>((M + cfg.group_phi - 1) / cfg.group_phi);
  const int groups_theta = static_cast<int>((N + cfg.group_theta - 1) / cfg.group_theta);
  const int levels_phi = 1 << cfg.bits_phi;
  const int levels_theta = 1 << cfg.bits_theta;

  SearchResult res;
  const double log2_count = static_cast<double>(cfg.bits_phi) * groups_phi +
                            static_cast<double>(cfg.bits_theta) * groups_theta;
  res.combinations = std::exp2(log2_count);
  res.sampled = log2_count > std::log2(static_cast<double>(cfg.c_max)) + 1e-12;
  const long count = res.sampled ? cfg.c_max : static_cast<long>(std::llround(res.combinations));

  // Digit i of candidate c: mixed radix (phi groups first) or uniform draws.
  auto decode = [&](long c, std::vector<int>& lp, std::vector<int>& lt) {
    lp.resize(static_cast<std::size_t>(groups_phi));
    lt.resize(static_cast<std::size_t>(groups_theta));
    if (res.sampled) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
      std::uniform_int_distribution<int> dp(1, levels_phi), dt(1, levels_theta);
      for (auto& l : lp) l = dp(rng);
      for (auto& l : lt) l = dt(rng);
    } else {
      long r = c;
      for (auto& l : lp) {
        l = static_cast<int>(r % levels_phi) + 1;
        r /= levels_phi;
      }
      for (auto& l : lt) {
        l = static_cast<int>(r % levels_theta) + 1;
        r /= levels_theta;
      }
    }
  };
  auto profile_of = [&](long c) {
    std::vector<int> lp, lt;
    decode(c, lp, lt);
    PhaseProfile p;
    p.phi = expand_groups(lp, cfg.bits_phi, cfg.group_phi, M);
    p.theta = N > 0 ? expand_groups(lt, cfg.bits_theta, cfg.group_theta, N) : CVec();
    return p;
  };

  const long chunks = (count + kSearchChunk - 1) / kSearchChunk;
  std::vector<Candidate> best(static_cast<std::size_t>(chunks));
  parallel_for(chunks, workers, [&](long ch) {
    Candidate local;
    const long end = std::min(count, (ch + 1) * kSearchChunk);
    for (long c = ch * kSearchChunk; c < end; ++c) {
      const RMat rates = rate_matrix(stats, patterns, profile_of(c));
      const Candidate cand{greedy_schedule(rates, cfg.objective, cfg.total_time).score, c};
      if (better(cand, local)) local = cand;
    }
    best[static_cast<std::size_t>(ch)] = local;
  });
  Candidate winner;
  for (const auto& c : best)
    if (better(c, winner)) winner = c;

  res.profile = profile_of(winner.index);
  const GreedyScore g = greedy_schedule(rate_matrix(stats, patterns, res.profile), cfg.objective, cfg.total_time);
  res.schedule = g.schedule;
  res.objective = g.values;
  res.score = g.score;
  res.evaluated = count;
  return res;
}

void validate_pso_config(const PsoConfig& cfg) {
  if (cfg.swarm < 2) throw ConfigError("pso.swarm must be >= 2");
  if (cfg.iterations < 1) throw ConfigError("pso.iterations must be >= 1");
  if (!(cfg.inertia > 0) || !(cfg.cognitive > 0) || !(cfg.social > 0))
    throw ConfigError("pso coefficients must be positive");
  if (!(cfg.total_time > 0)) throw ConfigError("total_time must be positive");
}

double wrap_angle(double a) {
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r < 0) r += 2.0 * kPi;
  double out = r - kPi;
  if (out >= kPi) out -= 2.0 * kPi;
  return out;
}

PsoResult pso_solve(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                    const PsoConfig& cfg, std::uint64_t seed) {
  validate_pso_config(cfg);
  if (patterns.empty()) throw ShapeError("pso: no beam patterns");
  const Eigen::Index M = stats.M();
  const Eigen::Index N = patterns.front().N();
  const Eigen::Index D = M + N;
  Rng rng(seed);
  std::uniform_real_distribution<double> angle(-kPi, kPi), unit(0.0, 1.0);

  auto profile_of = [&](const RVec& x) {
    PhaseProfile p;
    p.phi = CVec(M);
    p.theta = CVec(N);
    for (Eigen::Index m = 0; m < M; ++m) p.phi(m) = std::polar(1.0, x(m));
    for (Eigen::Index n = 0; n < N; ++n) p.theta(n) = std::polar(1.0, x(M + n));
    return p;
  };
  auto fitness = [&](const RVec& x) {
    return greedy_schedule(rate_matrix(stats, patterns, profile_of(x)), cfg.objective, cfg.total_time).score;
  };

  const auto S = static_cast<std::size_t>(cfg.swarm);
  std::vector<RVec> x(S), v(S, RVec::Zero(D)), pbest(S);
  std::vector<double> pscore(S);
  RVec gbest;
  double gscore = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < S; ++i) {
    x[i] = RVec(D);
    for (Eigen::Index d = 0; d < D; ++d) x[i](d) = angle(rng);
    pbest[i] = x[i];
    pscore[i] = fitness(x[i]);
    if (pscore[i] > gscore) {
      gscore = pscore[i];
      gbest = x[i];
    }
  }

  PsoResult res;
  res.trace.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int t = 0; t < cfg.iterations; ++t) {
    for (std::size_t i = 0; i < S; ++i) {
      for (Eigen::Index d = 0; d < D; ++d) {
        const double r1 = unit(rng), r2 = unit(rng);
        v[i](d) = cfg.inertia * v[i](d) + cfg.cognitive * r1 * (pbest[i](d) - x[i](d)) +
                  cfg.social * r2 * (gbest(d) - x[i](d));
        x[i](d) = wrap_angle(x[i](d) + v[i](d));
      }
      const double f = fitness(x[i]);
      if (f > pscore[i]) {
        pscore[i] = f;
        pbest[i] = x[i];
      }
    }
    for (std::size_t i = 0; i < S; ++i) {
      if (pscore[i] > gscore) {
        gscore = pscore[i];
        gbest = pbest[i];
      }
    }
    res.trace.push_back(gscore);
  }

  res.profile = profile_of(gbest);
  const GreedyScore g = greedy_schedule(rate_matrix(stats, patterns, res.profile), cfg.objective, cfg.total_time);
  res.schedule = g.schedule;
  res.objective = g.values;
  res.score = g.score;
  return res;
}

SingleLayerResult single_layer_baseline(const ChannelStats& stats, SingleLayerSolver solver,
                                        std::uint64_t seed, const BcdConfig& bcd,
                                        const RcgConfig& rcg) {
  const std::vector<BeamPattern> patterns{single_layer_pattern(stats.M())};
  SingleLayerResult out;
  if (solver == SingleLayerSolver::kBcd) {
    const BcdResult r = bcd_solve(stats, patterns, bcd, seed);
    out.phi = r.profile.phi;
    out.objective = r.objective;
    out.iterations = r.iterations;
    out.converged = r.converged;
  } else {
    const RcgResult r = rcg_solve_p5(stats, patterns, rcg, seed);
    out.phi = r.profile.phi;
    out.objective = r.objective;
    out.iterations = r.iterations;
    out.converged = r.converged;
  }
  return out;
}

DynamicResult dynamic_ris_baseline(const ChannelStats& stats, std::uint64_t seed,
                                   const RcgConfig& rcg, int starts) {
  if (starts < 1) throw ConfigError("dynamic baseline needs at least one start");
  const int K = stats.K();
  const int M = stats.M();
  DynamicResult out;
  out.v.resize(static_cast<std::size_t>(K));
  out.snr = RVec::Zero(K);
  for (int k = 0; k < K; ++k) {
    const CMat& Xi = stats.Xi[static_cast<std::size_t>(k)];
    SmoothProblem problem;
    problem.value = [&](const ManifoldPoint& p) { return rate_from_snr(statistical_snr(p.phi, Xi)); };
    problem.value_grad = [&](const ManifoldPoint& p, TangentVector& g) {
      const CVec y = Xi * p.phi;
      const double gamma = std::max(0.0, p.phi.dot(y).real());
      g.phi = (2.0 / (kLn2 * (1.0 + gamma))) * y;
      g.theta = CVec();
      g.blocks.clear();
      return rate_from_snr(gamma);
    };
    double best = -1.0;
    for (int s = 0; s < starts; ++s) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k * starts + s)));
      ManifoldPoint x0;
      x0.phi = random_unit_modulus(rng, M);
      const RcgRun run = rcg_maximize(problem, std::move(x0), rcg);
      const double snr = statistical_snr(run.point.phi, Xi);
      if (snr > best) {
        best = snr;
        out.v[static_cast<std::size_t>(k)] = run.point.phi;
      }
    }
    out.snr(k) = best;
  }
  RVec rates = out.snr.unaryExpr([](double s) { return rate_from_snr(s); });
  out.objective.min_rate = rates.minCoeff();
  out.objective.throughput = rcg.total_time / static_cast<double>(K) * rates.sum();
  return out;
}

}  // namespace mis

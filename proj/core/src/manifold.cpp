#include "mis/manifold.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "mis/random.hpp"
#include "mis/simplex.hpp"

namespace mis {

namespace {

CVec circle_project(const CVec& x, const CVec& g) {
  if (x.size() == 0) return g;
  const RVec radial = g.cwiseProduct(x.conjugate()).real();
  return g - radial.cast<cplx>().cwiseProduct(x);
}

double cdot(const CVec& a, const CVec& b) { return a.size() == 0 ? 0.0 : a.dot(b).real(); }

RMat project_block(const RMat& Y, SimplexAxis axis, double floor) {
  RMat out(Y.rows(), Y.cols());
  if (axis == SimplexAxis::kRows) {
    for (Eigen::Index r = 0; r < Y.rows(); ++r)
      out.row(r) = project_simplex_positive(Y.row(r).transpose(), floor).transpose();
  } else {
    for (Eigen::Index c = 0; c < Y.cols(); ++c)
      out.col(c) = project_simplex_positive(Y.col(c), floor);
  }
  return out;
}

RMat tangent_block(const RMat& G, SimplexAxis axis) {
  if (axis == SimplexAxis::kRows) return G.colwise() - G.rowwise().mean();
  return G.rowwise() - G.colwise().mean();
}

CVec circle_retract(const CVec& x, const CVec& d, double step) {
  CVec out = x + step * d;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double r = std::abs(out(i));
    out(i) = r > 1e-300 ? out(i) / r : x(i);
  }
  return out;
}

TangentVector difference(const ManifoldPoint& a, const ManifoldPoint& b) {
  TangentVector d;
  d.phi = a.phi - b.phi;
  d.theta = a.theta - b.theta;
  d.blocks.resize(a.blocks.size());
  for (std::size_t i = 0; i < a.blocks.size(); ++i) d.blocks[i] = a.blocks[i] - b.blocks[i];
  return d;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

RMat selection_dense(const std::vector<int>& ms1_index, int M) {
  RMat S = RMat::Zero(M, static_cast<Eigen::Index>(ms1_index.size()));
  for (std::size_t n = 0; n < ms1_index.size(); ++n) S(ms1_index[n], static_cast<Eigen::Index>(n)) = 1.0;
  return S;
}

}  // namespace

void validate_rcg_config(const RcgConfig& cfg) {
  if (!(cfg.grad_tol > 0)) throw ConfigError("rcg.grad_tol must be positive");
  if (cfg.max_iter < 1) throw ConfigError("rcg.max_iter must be >= 1");
  if (!(cfg.alpha0 > 0)) throw ConfigError("rcg.alpha0 must be positive");
  if (!(cfg.shrink > 0 && cfg.shrink < 1)) throw ConfigError("rcg.shrink must lie in (0, 1)");
  if (!(cfg.armijo_c > 0 && cfg.armijo_c < 1)) throw ConfigError("rcg.armijo_c must lie in (0, 1)");
  if (cfg.max_backtracks < 1) throw ConfigError("rcg.max_backtracks must be >= 1");
  if (!(cfg.simplex_floor > 0 && cfg.simplex_floor < 1e-3)) throw ConfigError("rcg.simplex_floor out of range");
  if (cfg.p_weight < 0 || cfg.q_weight < 0) throw ConfigError("rcg penalty weights must be >= 0");
  if (!(cfg.total_time > 0)) throw ConfigError("total_time must be positive");
  if (cfg.starts < 1) throw ConfigError("rcg.starts must be >= 1");
}

double inner(const TangentVector& a, const TangentVector& b) {
  double s = cdot(a.phi, b.phi) + cdot(a.theta, b.theta);
  for (std::size_t i = 0; i < a.blocks.size(); ++i) s += a.blocks[i].cwiseProduct(b.blocks[i]).sum();
  return s;
}

TangentVector riemannian_grad(const ManifoldPoint& x, const TangentVector& egrad, SimplexAxis axis) {
  TangentVector g;
  g.phi = circle_project(x.phi, egrad.phi);
  g.theta = circle_project(x.theta, egrad.theta);
  g.blocks.reserve(egrad.blocks.size());
  for (const auto& G : egrad.blocks) g.blocks.push_back(tangent_block(G, axis));
  return g;
}

TangentVector conjugate_direction(const ManifoldPoint& x, const TangentVector& grad,
                                  const TangentVector& grad_prev, const TangentVector& dir_prev) {
  auto circle = [](const CVec& at, const CVec& g, const CVec& gp, const CVec& dp) -> CVec {
    if (g.size() == 0) return g;
    const CVec tg = circle_project(at, gp);
    const CVec td = circle_project(at, dp);
    const double den = gp.squaredNorm();
    const double beta = den > 0 ? std::max(0.0, cdot(g, g - tg) / den) : 0.0;
    CVec d = g + beta * td;
    if (cdot(d, g) <= 0.0) d = g;
    return d;
  };
  TangentVector d;
  d.phi = circle(x.phi, grad.phi, grad_prev.phi, dir_prev.phi);
  d.theta = circle(x.theta, grad.theta, grad_prev.theta, dir_prev.theta);
  d.blocks.resize(grad.blocks.size());
  for (std::size_t i = 0; i < grad.blocks.size(); ++i) {
    const RMat& G = grad.blocks[i];
    const RMat& Gp = grad_prev.blocks[i];
    const double den = Gp.squaredNorm();
    const double beta = den > 0 ? std::max(0.0, G.cwiseProduct(G - Gp).sum() / den) : 0.0;
    d.blocks[i] = G + beta * dir_prev.blocks[i];
    if (d.blocks[i].cwiseProduct(G).sum() <= 0.0) d.blocks[i] = G;
  }
  return d;
}

ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& dir, double step,
                      SimplexAxis axis, double floor) {
  ManifoldPoint out;
  out.phi = circle_retract(x.phi, dir.phi, step);
  out.theta = circle_retract(x.theta, dir.theta, step);
  out.blocks.reserve(x.blocks.size());
  for (std::size_t i = 0; i < x.blocks.size(); ++i)
    out.blocks.push_back(project_block(x.blocks[i] + step * dir.blocks[i], axis, floor));
  return out;
}

double stationarity(const ManifoldPoint& x, const TangentVector& egrad, SimplexAxis axis,
                    double floor) {
  double s = circle_project(x.phi, egrad.phi).squaredNorm() +
             circle_project(x.theta, egrad.theta).squaredNorm();
  for (std::size_t i = 0; i < x.blocks.size(); ++i) {
    const RMat moved = project_block(x.blocks[i] + tangent_block(egrad.blocks[i], axis), axis, floor);
    s += (moved - x.blocks[i]).squaredNorm();
  }
  return std::sqrt(s);
}

RcgRun rcg_maximize(const SmoothProblem& problem, ManifoldPoint start, const RcgConfig& cfg) {
  validate_rcg_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  RcgRun run;
  ManifoldPoint x = std::move(start);
  TangentVector eg;
  double f = problem.value_grad(x, eg);
  TangentVector g = riemannian_grad(x, eg, problem.axis);
  TangentVector g_prev, d_prev;
  bool first = true;
  double measure = stationarity(x, eg, problem.axis, cfg.simplex_floor);
  run.trace.push_back({0, f, measure, 0.0, ms_since(t0)});

  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    if (measure < cfg.grad_tol) {
      run.converged = true;
      break;
    }
    TangentVector d = first ? g : conjugate_direction(x, g, g_prev, d_prev);
    bool accepted = false;
    ManifoldPoint x_new;
    TangentVector eg_new;
    double f_new = f;
    double alpha = cfg.alpha0;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      alpha = cfg.alpha0;
      for (int bt = 0; bt < cfg.max_backtracks; ++bt, alpha *= cfg.shrink) {
        x_new = retract(x, d, alpha, problem.axis, cfg.simplex_floor);
        // The gradient costs little beyond the value; keep it for the accepted point.
        f_new = problem.value_grad(x_new, eg_new);
        const double predicted = inner(eg, difference(x_new, x));
        if (std::isfinite(f_new) && f_new >= f && f_new >= f + cfg.armijo_c * std::max(predicted, 0.0)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) d = g;  // retry once along the gradient
    }
    if (!accepted) break;

    g_prev = g;
    d_prev = d;
    first = false;
    x = std::move(x_new);
    f = f_new;
    eg = std::move(eg_new);
    g = riemannian_grad(x, eg, problem.axis);
    measure = stationarity(x, eg, problem.axis, cfg.simplex_floor);
    run.trace.push_back({it + 1, f, measure, alpha, ms_since(t0)});
  }
  if (measure < cfg.grad_tol) run.converged = true;
  run.point = std::move(x);
  run.value = f;
  run.grad_norm = measure;
  run.iterations = it;
  return run;
}

double objective_f(const ManifoldPoint& x, const std::vector<BeamPattern>& patterns,
                   const std::vector<CMat>& Xi) {
  const RMat& X = x.blocks.at(0);
  double total = 0.0;
  for (std::size_t u = 0; u < patterns.size(); ++u) {
    const CVec v = composite_phase(patterns[u], x.theta, x.phi);
    for (std::size_t k = 0; k < Xi.size(); ++k) {
      const double xi = X(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(u));
      if (xi == 0.0) continue;
      total += xi * rate_from_snr(std::max(0.0, v.dot(Xi[k] * v).real()));
    }
  }
  return total;
}

TangentVector euclidean_grads(const ManifoldPoint& x, const std::vector<BeamPattern>& patterns,
                              const std::vector<CMat>& Xi, double* value) {
  const RMat& X = x.blocks.at(0);
  const auto K = static_cast<Eigen::Index>(Xi.size());
  const auto U = static_cast<Eigen::Index>(patterns.size());
  if (X.rows() != K || X.cols() != U) throw ShapeError("euclidean_grads: schedule shape mismatch");
  TangentVector g;
  g.phi = CVec::Zero(x.phi.size());
  g.theta = CVec::Zero(x.theta.size());
  g.blocks.assign(1, RMat::Zero(K, U));
  double total = 0.0;
  for (Eigen::Index u = 0; u < U; ++u) {
    const BeamPattern& pat = patterns[static_cast<std::size_t>(u)];
    const CVec w = pat.overlay(x.theta);
    const CVec v = w.cwiseProduct(x.phi);
    CVec acc = CVec::Zero(v.size());  // sum_k coef_k Xi_k v
    for (Eigen::Index k = 0; k < K; ++k) {
      const CVec y = Xi[static_cast<std::size_t>(k)] * v;
      const double gamma = std::max(0.0, v.dot(y).real());
      const double rate = rate_from_snr(gamma);
      g.blocks[0](k, u) = rate;
      total += X(k, u) * rate;
      const double coef = X(k, u) * 2.0 / (kLn2 * (1.0 + gamma));
      if (coef != 0.0) acc += coef * y;
    }
    g.phi += w.conjugate().cwiseProduct(acc);
    for (int n = 0; n < pat.N(); ++n) {
      const int m = pat.ms1_index[static_cast<std::size_t>(n)];
      g.theta(n) += std::conj(x.phi(m)) * acc(m);
    }
  }
  if (value) *value = total;
  return g;
}

RcgResult rcg_solve_p5_from(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                            const RcgConfig& cfg, const PhaseProfile& start, const RMat& X0) {
  if (patterns.empty()) throw ShapeError("rcg: no beam patterns");
  if (X0.rows() != stats.K() || X0.cols() != static_cast<Eigen::Index>(patterns.size()))
    throw ShapeError("rcg: initial schedule shape mismatch");
  const std::vector<CMat>& Xi = stats.Xi;
  SmoothProblem problem;
  problem.axis = SimplexAxis::kRows;
  problem.value = [&](const ManifoldPoint& p) { return objective_f(p, patterns, Xi); };
  problem.value_grad = [&](const ManifoldPoint& p, TangentVector& g) {
    double v = 0.0;
    g = euclidean_grads(p, patterns, Xi, &v);
    return v;
  };
  ManifoldPoint x0;
  x0.phi = start.phi;
  x0.theta = start.theta;
  x0.blocks = {project_block(X0, SimplexAxis::kRows, cfg.simplex_floor)};
  RcgRun run = rcg_maximize(problem, std::move(x0), cfg);

  RcgResult res;
  res.profile = {run.point.phi, run.point.theta};
  res.relaxed_X = run.point.blocks[0];
  res.relaxed_value = run.value;
  res.schedule = threshold_schedule(res.relaxed_X);
  ManifoldPoint thresholded = run.point;
  thresholded.blocks[0] = res.schedule.X;
  res.thresholded_value = objective_f(thresholded, patterns, Xi);
  res.threshold_change =
      std::abs(res.relaxed_value - res.thresholded_value) / std::max(std::abs(res.relaxed_value), 1e-300);
  for (int k = 0; k < stats.K(); ++k)
    res.max_fractionality = std::max(res.max_fractionality, 1.0 - res.relaxed_X.row(k).maxCoeff());
  const RMat rates = rate_matrix(stats, patterns, res.profile);
  res.objective = objectives(res.schedule, rates, cfg.total_time);
  res.grad_norm = run.grad_norm;
  res.iterations = run.iterations;
  res.converged = run.converged;
  res.trace = std::move(run.trace);
  return res;
}

RcgResult rcg_solve_p5(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                       const RcgConfig& cfg, std::uint64_t seed) {
  if (patterns.empty()) throw ShapeError("rcg: no beam patterns");
  RcgResult best;
  int iterations = 0;
  for (int i = 0; i < cfg.starts; ++i) {
    Rng rng(i == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(i)));
    PhaseProfile start;
    start.phi = random_unit_modulus(rng, stats.M());
    start.theta = random_unit_modulus(rng, patterns.front().N());
    RcgResult r = rcg_solve_p5_from(stats, patterns, cfg, start,
                                    Schedule::uniform(stats.K(), static_cast<int>(patterns.size())).X);
    iterations += r.iterations;
    if (i == 0 || r.objective.throughput > best.objective.throughput) best = std::move(r);
  }
  best.iterations = iterations;
  return best;
}

PenaltyValues penalties_pq(const std::vector<RMat>& S) {
  PenaltyValues out;
  for (const auto& Sk : S) {
    if (Sk.cols() == 0) continue;
    out.p += (Sk.array() - 0.5).square().sum() / static_cast<double>(Sk.cols());
    const RVec rows = Sk.rowwise().sum();
    for (Eigen::Index m = 0; m < rows.size(); ++m) {
      const double over = std::max(rows(m), 1.0) - 1.0;
      out.q += over * over;
    }
  }
  return out;
}

double p7_objective(const ManifoldPoint& x, const std::vector<CMat>& Xi, const RcgConfig& cfg) {
  double total = 0.0;
  const CVec tm1 = x.theta - CVec::Ones(x.theta.size());
  for (std::size_t k = 0; k < Xi.size(); ++k) {
    const RMat& S = x.blocks.at(k);
    const CVec w = (S.cast<cplx>() * tm1).array() + cplx(1.0, 0.0);
    const CVec v = w.cwiseProduct(x.phi);
    total += rate_from_snr(std::max(0.0, v.dot(Xi[k] * v).real()));
  }
  const PenaltyValues pq = penalties_pq(x.blocks);
  return total + cfg.p_weight * pq.p - cfg.q_weight * pq.q;
}

TangentVector p7_euclidean_grads(const ManifoldPoint& x, const std::vector<CMat>& Xi,
                                 const RcgConfig& cfg, double* value) {
  const auto K = Xi.size();
  if (x.blocks.size() != K) throw ShapeError("p7: one placement block per user required");
  const Eigen::Index N = x.theta.size();
  const CVec tm1 = x.theta - CVec::Ones(N);
  TangentVector g;
  g.phi = CVec::Zero(x.phi.size());
  g.theta = CVec::Zero(N);
  g.blocks.resize(K);
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const RMat& S = x.blocks[k];
    const CVec w = (S.cast<cplx>() * tm1).array() + cplx(1.0, 0.0);
    const CVec v = w.cwiseProduct(x.phi);
    const CVec y = Xi[k] * v;
    const double gamma = std::max(0.0, v.dot(y).real());
    total += rate_from_snr(gamma);
    const double coef = 2.0 / (kLn2 * (1.0 + gamma));
    g.phi += coef * w.conjugate().cwiseProduct(y);
    const CVec z = x.phi.conjugate().cwiseProduct(y);
    g.theta += coef * (S.transpose().cast<cplx>() * z);
    // Re{z (theta - 1)^H}
    RMat gs = coef * (z.real() * tm1.real().transpose() + z.imag() * tm1.imag().transpose());
    gs += cfg.p_weight * (2.0 / static_cast<double>(N)) * (S.array() - 0.5).matrix();
    const RVec over = (S.rowwise().sum().array() - 1.0).cwiseMax(0.0).matrix();
    gs.colwise() -= cfg.q_weight * 2.0 * over;
    g.blocks[k] = std::move(gs);
  }
  if (value) {
    const PenaltyValues pq = penalties_pq(x.blocks);
    *value = total + cfg.p_weight * pq.p - cfg.q_weight * pq.q;
  }
  return g;
}

std::vector<int> repair_placement(const RMat& S) {
  const auto M = S.rows();
  const auto N = S.cols();
  if (N > M) throw ShapeError("repair_placement: more MS2 elements than MS1 slots");
  std::vector<int> claim(static_cast<std::size_t>(N));
  for (Eigen::Index n = 0; n < N; ++n) {
    Eigen::Index best = 0;
    for (Eigen::Index m = 1; m < M; ++m)
      if (S(m, n) > S(best, n)) best = m;
    claim[static_cast<std::size_t>(n)] = static_cast<int>(best);
  }
  // Strongest claims are served first; ties go to the lower column.
  std::vector<int> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return S(claim[static_cast<std::size_t>(a)], a) > S(claim[static_cast<std::size_t>(b)], b);
  });
  std::vector<int> owner(static_cast<std::size_t>(M), -1);
  std::vector<int> out(static_cast<std::size_t>(N), -1);
  std::vector<int> displaced;
  for (int n : order) {
    const int m = claim[static_cast<std::size_t>(n)];
    if (owner[static_cast<std::size_t>(m)] < 0) {
      owner[static_cast<std::size_t>(m)] = n;
      out[static_cast<std::size_t>(n)] = m;
    } else {
      displaced.push_back(n);
    }
  }
  std::sort(displaced.begin(), displaced.end());
  for (int n : displaced) {
    int best = -1;
    for (Eigen::Index m = 0; m < M; ++m) {
      if (owner[static_cast<std::size_t>(m)] >= 0) continue;
      if (best < 0 || S(m, n) > S(best, n)) best = static_cast<int>(m);
    }
    owner[static_cast<std::size_t>(best)] = n;
    out[static_cast<std::size_t>(n)] = best;
  }
  return out;
}

BeamPattern placement_pattern(const std::vector<int>& ms1_index, int M) {
  BeamPattern p;
  p.index = 0;
  p.row_shift = 0;
  p.col_shift = 0;
  p.ms1_index = ms1_index;
  p.padding = RVec::Ones(M);
  for (int m : ms1_index) {
    if (m < 0 || m >= M) throw ShapeError("placement_pattern: MS1 index out of range");
    if (p.padding(m) == 0.0) throw DomainError("placement_pattern: MS1 slot used twice");
    p.padding(m) = 0.0;
  }
  return p;
}

ObjectiveValues placement_objectives(const ChannelStats& stats, const PhaseProfile& profile,
                                     const std::vector<BeamPattern>& placements, double total_time) {
  if (static_cast<int>(placements.size()) != stats.K())
    throw ShapeError("placement_objectives: one placement per user required");
  RVec rates(stats.K());
  for (int k = 0; k < stats.K(); ++k) {
    const CVec v = composite_phase(placements[static_cast<std::size_t>(k)], profile.theta, profile.phi);
    rates(k) = jensen_rate(v, stats.Xi[static_cast<std::size_t>(k)]);
  }
  ObjectiveValues out;
  out.min_rate = rates.minCoeff();
  out.throughput = total_time / static_cast<double>(stats.K()) * rates.sum();
  return out;
}

namespace {

ElementwiseResult solve_p7(const ChannelStats& stats, const RcgConfig& cfg, ManifoldPoint x0) {
  const std::vector<CMat>& Xi = stats.Xi;
  SmoothProblem problem;
  problem.axis = SimplexAxis::kCols;
  problem.value = [&](const ManifoldPoint& p) { return p7_objective(p, Xi, cfg); };
  problem.value_grad = [&](const ManifoldPoint& p, TangentVector& g) {
    double v = 0.0;
    g = p7_euclidean_grads(p, Xi, cfg, &v);
    return v;
  };
  RcgRun run = rcg_maximize(problem, std::move(x0), cfg);

  ElementwiseResult res;
  res.profile = {run.point.phi, run.point.theta};
  const int M = stats.M();
  for (const auto& S : run.point.blocks) res.placements.push_back(placement_pattern(repair_placement(S), M));
  res.objective = placement_objectives(stats, res.profile, res.placements, cfg.total_time);
  res.relaxed_value = run.value;
  res.grad_norm = run.grad_norm;
  res.iterations = run.iterations;
  res.converged = run.converged;
  res.trace = std::move(run.trace);
  return res;
}

}  // namespace

ElementwiseResult rcg_solve_p7(const ChannelStats& stats, int N, const RcgConfig& cfg,
                               std::uint64_t seed) {
  const int M = stats.M();
  if (N < 1 || N > M) throw ShapeError("rcg_solve_p7: need 1 <= N <= M");
  Rng rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  ManifoldPoint x0;
  x0.phi = random_unit_modulus(rng, M);
  x0.theta = random_unit_modulus(rng, N);
  for (int k = 0; k < stats.K(); ++k) {
    RMat S(M, N);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < M; ++m) S(m, n) = 1.0 + 0.1 * jitter(rng);
    S = S.array().rowwise() / S.colwise().sum().array();
    x0.blocks.push_back(S);
  }
  return solve_p7(stats, cfg, std::move(x0));
}

ElementwiseResult rcg_solve_p7_from(const ChannelStats& stats, const RcgConfig& cfg,
                                    const PhaseProfile& start,
                                    const std::vector<BeamPattern>& start_placements, double blend) {
  const int M = stats.M();
  if (static_cast<int>(start_placements.size()) != stats.K())
    throw ShapeError("rcg_solve_p7_from: one placement per user required");
  if (!(blend > 0.0 && blend < 1.0)) throw DomainError("rcg_solve_p7_from: blend must lie in (0, 1)");
  ManifoldPoint x0;
  x0.phi = start.phi;
  x0.theta = start.theta;
  for (const auto& p : start_placements) {
    if (p.N() != start.theta.size()) throw ShapeError("rcg_solve_p7_from: placement size mismatch");
    x0.blocks.push_back((1.0 - blend) * selection_dense(p.ms1_index, M) +
                        RMat::Constant(M, p.N(), blend / M));
  }
  return solve_p7(stats, cfg, std::move(x0));
}

}  // namespace mis

#include "mis/bcd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mis/random.hpp"
#include "mis/simplex.hpp"

namespace mis {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// min c.xi over the simplex subject to q.xi >= s. The optimum sits on a vertex
// or on an edge where the constraint is tight, so enumerating both is exact.
double min_cost_at(const RVec& q, const RVec& c, double s, RVec* xi) {
  const auto U = q.size();
  double best = kInf;
  Eigen::Index bu = -1, bv = -1;
  double bw = 1.0;
  for (Eigen::Index u = 0; u < U; ++u) {
    if (q(u) >= s && c(u) < best) {
      best = c(u);
      bu = bv = u;
      bw = 1.0;
    }
  }
  for (Eigen::Index u = 0; u < U; ++u) {
    if (!(q(u) > s)) continue;
    for (Eigen::Index v = 0; v < U; ++v) {
      if (!(q(v) < s) || !(c(v) < c(u))) continue;
      const double w = (s - q(v)) / (q(u) - q(v));
      const double cost = c(v) + w * (c(u) - c(v));
      if (cost < best) {
        best = cost;
        bu = u;
        bv = v;
        bw = w;
      }
    }
  }
  if (xi && bu >= 0) {
    xi->setZero(U);
    (*xi)(bu) += bw;
    (*xi)(bv) += 1.0 - bw;
  }
  return best;
}

// Maximizes a concave function on [lo, hi] by golden-section search, checking
// both endpoints as well.
template <typename Fn>
double golden_max(Fn&& f, double lo, double hi) {
  if (!(hi > lo)) return hi;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    }
  }
  double best = 0.5 * (a + b);
  double fbest = f(best);
  for (double cand : {lo, hi, x1, x2}) {
    const double fc = f(cand);
    if (fc > fbest) {
      fbest = fc;
      best = cand;
    }
  }
  return best;
}

RVec user_snr(const RMat& q, const RMat& X) { return X.cwiseProduct(q).rowwise().sum(); }

double penalty_ub(const RMat& X, const RMat& X_l) {
  return (X.array() * (1.0 - 2.0 * X_l.array()) + X_l.array().square()).sum();
}

double clamp_log2p(double s) { return s > -1.0 ? std::log2(1.0 + s) : -kInf; }

CVec normalize_phases(const CVec& x) {
  CVec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double r = std::abs(x(i));
    out(i) = r > 1e-12 ? x(i) / r : cplx(1.0, 0.0);
  }
  return out;
}

CVec project_disks(const CVec& x) {
  CVec out = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double r = std::abs(x(i));
    if (r > 1.0) out(i) /= r;
  }
  return out;
}

RMat compute_q(const std::vector<BeamPattern>& patterns, const std::vector<CMat>& Xi,
               const PhaseProfile& p) {
  RMat q(static_cast<Eigen::Index>(Xi.size()), static_cast<Eigen::Index>(patterns.size()));
  for (std::size_t u = 0; u < patterns.size(); ++u) {
    const CVec v = composite_phase(patterns[u], p.theta, p.phi);
    for (std::size_t k = 0; k < Xi.size(); ++k)
      q(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(u)) =
          std::max(0.0, v.dot(Xi[k] * v).real());
  }
  return q;
}

struct Linearization {
  std::vector<CVec> g;
  RVec d;
};

enum class Block { kPhi, kTheta };

Linearization linearize(const std::vector<BeamPattern>& patterns, const std::vector<CMat>& Xi,
                        const RMat& X, const PhaseProfile& p, Block block) {
  const auto K = static_cast<int>(Xi.size());
  const auto U = static_cast<int>(patterns.size());
  const Eigen::Index len = block == Block::kPhi ? p.phi.size() : p.theta.size();
  Linearization lin;
  lin.g.assign(static_cast<std::size_t>(K), CVec::Zero(len));
  lin.d = RVec::Zero(K);
  for (int u = 0; u < U; ++u) {
    const BeamPattern& pat = patterns[static_cast<std::size_t>(u)];
    const CVec w = pat.overlay(p.theta);
    const CVec v = w.cwiseProduct(p.phi);
    for (int k = 0; k < K; ++k) {
      const double xi = X(k, u);
      if (xi == 0.0) continue;
      const CVec y = Xi[static_cast<std::size_t>(k)] * v;
      const double q = v.dot(y).real();
      if (block == Block::kPhi) {
        // B phi = conj(w) .* Xi v
        lin.g[static_cast<std::size_t>(k)] += (2.0 * xi) * w.conjugate().cwiseProduct(y);
        lin.d(k) -= xi * q;
      } else {
        // A theta + a = S^T (conj(phi) .* Xi v)
        CVec z(len);
        for (Eigen::Index n = 0; n < len; ++n) {
          const int m = pat.ms1_index[static_cast<std::size_t>(n)];
          z(n) = std::conj(p.phi(m)) * y(m);
        }
        lin.g[static_cast<std::size_t>(k)] += (2.0 * xi) * z;
        lin.d(k) += xi * (q - 2.0 * p.theta.dot(z).real());
      }
    }
  }
  return lin;
}

CVec sca_block(const std::vector<BeamPattern>& patterns, const std::vector<CMat>& Xi,
               const RMat& X, PhaseProfile p, const BcdConfig& cfg, Block block) {
  auto evaluate = [&](const PhaseProfile& pp) {
    return bcd_block_objective(compute_q(patterns, Xi, pp), X, cfg.objective);
  };
  CVec& x = block == Block::kPhi ? p.phi : p.theta;
  if (x.size() == 0) return x;
  double value = evaluate(p);
  for (int it = 0; it < cfg.sca_max_iter; ++it) {
    const Linearization lin = linearize(patterns, Xi, X, p, block);
    const bool ip = cfg.subsolver == DiskSolver::kInteriorPoint;
    const bool maxmin = cfg.objective == Objective::kMinRate;
    const DiskSolution sol =
        maxmin ? (ip ? maxmin_affine_disk_ip(lin.g, lin.d, x, cfg.sub_tol, cfg.sub_max_iter)
                     : maxmin_affine_disk(lin.g, lin.d, x, cfg.sub_tol, cfg.sub_max_iter))
               : (ip ? sumlog_affine_disk_ip(lin.g, lin.d, x, cfg.sub_tol, cfg.sub_max_iter)
                     : sumlog_affine_disk(lin.g, lin.d, x, cfg.sub_tol, cfg.sub_max_iter));
    const CVec previous = x;
    x = sol.x;
    const double next = evaluate(p);
    if (!(next > value)) {
      x = previous;
      break;
    }
    const double rel = (next - value) / std::max(std::abs(value), 1e-300);
    value = next;
    if (rel < cfg.sca_tol) break;
  }
  return x;
}

}  // namespace

void validate_bcd_config(const BcdConfig& cfg) {
  if (cfg.rho0 < 0) throw ConfigError("bcd.rho0 must be >= 0");
  if (cfg.zeta < 1) throw ConfigError("bcd.zeta must be >= 1");
  if (!(cfg.eps1 > 0) || !(cfg.eps2 > 0)) throw ConfigError("bcd thresholds must be positive");
  if (cfg.max_inner < 1 || cfg.max_outer < 1) throw ConfigError("bcd iteration caps must be >= 1");
  if (!(cfg.sca_tol > 0) || cfg.sca_max_iter < 1) throw ConfigError("bcd SCA settings invalid");
  if (!(cfg.sub_tol > 0) || cfg.sub_max_iter < 1) throw ConfigError("bcd subsolver settings invalid");
  if (!(cfg.total_time > 0)) throw ConfigError("total_time must be positive");
  if (cfg.starts < 1) throw ConfigError("bcd.starts must be >= 1");
}

double penalty_h(const RMat& X) {
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    const double x = X.data()[i];
    if (!(x >= -1e-12 && x <= 1.0 + 1e-12)) throw DomainError("penalty_h: entry outside [0, 1]");
  }
  return (X.array() - X.array().square()).sum();
}

double bcd_block_objective(const RMat& q, const RMat& X, Objective objective) {
  const RVec s = user_snr(q, X);
  if (objective == Objective::kMinRate) return s.minCoeff();
  double total = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) total += clamp_log2p(s(k));
  return total;
}

ScheduleStep solve_p4_2(const RMat& q, const RMat& X_l, double rho, const BcdConfig& cfg) {
  if (q.rows() != X_l.rows() || q.cols() != X_l.cols()) throw ShapeError("solve_p4_2: shape mismatch");
  if (!q.allFinite()) throw NumericError("solve_p4_2: non-finite SNR constants");
  const auto K = q.rows();
  const RMat c = (1.0 - 2.0 * X_l.array()).matrix();
  ScheduleStep out;
  out.X = RMat::Zero(K, q.cols());

  if (cfg.objective == Objective::kMinRate) {
    double lo = kInf, hi = kInf;
    for (Eigen::Index k = 0; k < K; ++k) {
      lo = std::min(lo, q.row(k).minCoeff());
      hi = std::min(hi, q.row(k).maxCoeff());
    }
    lo = std::min(lo, hi);
    auto F = [&](double mu) {
      double cost = 0.0;
      for (Eigen::Index k = 0; k < K; ++k)
        cost += min_cost_at(q.row(k).transpose(), c.row(k).transpose(), mu, nullptr);
      return mu - rho * cost;
    };
    const double mu = golden_max(F, lo, hi);
    for (Eigen::Index k = 0; k < K; ++k) {
      RVec xi;
      min_cost_at(q.row(k).transpose(), c.row(k).transpose(), mu, &xi);
      out.X.row(k) = xi.transpose();
    }
  } else {
    for (Eigen::Index k = 0; k < K; ++k) {
      const RVec qk = q.row(k).transpose();
      const RVec ck = c.row(k).transpose();
      auto F = [&](double s) { return std::log2(1.0 + s) - rho * min_cost_at(qk, ck, s, nullptr); };
      const double s = golden_max(F, qk.minCoeff(), qk.maxCoeff());
      RVec xi;
      min_cost_at(qk, ck, s, &xi);
      out.X.row(k) = xi.transpose();
    }
  }

  auto surrogate = [&](const RMat& X) {
    return bcd_block_objective(q, X, cfg.objective) - rho * penalty_ub(X, X_l);
  };
  out.surrogate = surrogate(out.X);
  const double previous = surrogate(X_l);
  if (previous > out.surrogate) {
    out.X = X_l;
    out.surrogate = previous;
  }
  out.mu = bcd_block_objective(q, out.X, cfg.objective);
  return out;
}

QuadraticForms build_quadratic_forms(const std::vector<BeamPattern>& patterns,
                                     const std::vector<CMat>& Xi, const PhaseProfile& profile) {
  QuadraticForms f;
  f.K = static_cast<int>(Xi.size());
  f.U = static_cast<int>(patterns.size());
  const auto count = static_cast<std::size_t>(f.K * f.U);
  f.A.resize(count);
  f.a.resize(count);
  f.a_scalar.resize(count);
  f.B.resize(count);
  const CVec& phi = profile.phi;
  for (int u = 0; u < f.U; ++u) {
    const BeamPattern& pat = patterns[static_cast<std::size_t>(u)];
    const CMat S = pat.selection().cast<cplx>();
    const CVec e = pat.padding.cast<cplx>();
    const CVec w = pat.overlay(profile.theta);
    for (int k = 0; k < f.K; ++k) {
      // diag(phi^*) Xi diag(phi) and diag(w^*) Xi diag(w)
      const CMat& X = Xi[static_cast<std::size_t>(k)];
      const CMat P = phi.conjugate().asDiagonal() * X * phi.asDiagonal();
      const auto i = static_cast<std::size_t>(f.at(k, u));
      f.A[i] = S.adjoint() * P * S;
      f.a[i] = S.adjoint() * P * e;
      f.a_scalar[i] = e.dot(P * e).real();
      f.B[i] = w.conjugate().asDiagonal() * X * w.asDiagonal();
    }
  }
  return f;
}

DiskSolution maxmin_affine_disk(const std::vector<CVec>& g, const RVec& d, const CVec& start,
                                double tol, int max_iter) {
  const auto K = static_cast<Eigen::Index>(g.size());
  const Eigen::Index M = start.size();
  if (K == 0 || d.size() != K) throw ShapeError("maxmin_affine_disk: empty or inconsistent input");
  CMat G(M, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    if (g[static_cast<std::size_t>(k)].size() != M) throw ShapeError("maxmin_affine_disk: length mismatch");
    G.col(k) = g[static_cast<std::size_t>(k)];
  }

  auto primal = [&](const CVec& x) { return ((G.adjoint() * x).real() + d).minCoeff(); };
  auto dual = [&](const RVec& lam) {
    return (G * lam.cast<cplx>()).cwiseAbs().sum() + lam.dot(d);
  };
  auto hard_point = [&](const CVec& c, const CVec& fallback) {
    CVec x(M);
    for (Eigen::Index m = 0; m < M; ++m) {
      const double r = std::abs(c(m));
      x(m) = r > 0.0 ? c(m) / r : fallback(m);
    }
    return x;
  };

  DiskSolution best;
  best.x = start;
  best.value = primal(start);
  RVec lam = RVec::Constant(K, 1.0 / static_cast<double>(K));
  best.upper_bound = dual(lam);

  auto consider = [&](const CVec& x) {
    const double v = primal(x);
    if (v > best.value) {
      best.value = v;
      best.x = x;
    }
  };
  auto done = [&] {
    const double scale = std::max({std::abs(best.value), std::abs(best.upper_bound), 1e-300});
    return best.upper_bound - best.value <= tol * scale;
  };

  if (K == 1) {
    consider(hard_point(G.col(0), start));
    return best;
  }
  const double magnitude = G.cwiseAbs().rowwise().sum().mean() / static_cast<double>(K);
  if (!(magnitude > 0.0)) return best;

  double delta = 0.1 * magnitude;
  double L = G.squaredNorm() / delta;
  const int stages = 10;
  const int per_stage = std::max(20, max_iter / stages);
  int it = 0;
  for (int stage = 0; stage < stages && it < max_iter && !done(); ++stage, delta *= 0.1) {
    auto smooth = [&](const RVec& lam_, CVec* c_out) {
      const CVec c = G * lam_.cast<cplx>();
      if (c_out) *c_out = c;
      return (c.cwiseAbs2().array() + delta * delta).sqrt().sum() + lam_.dot(d);
    };
    RVec y = lam;
    double t = 1.0;
    double f_lam = smooth(lam, nullptr);
    for (int s = 0; s < per_stage && it < max_iter; ++s, ++it) {
      CVec c;
      const double fy = smooth(y, &c);
      const CVec ratio = (c.array() / (c.cwiseAbs2().array() + delta * delta).sqrt().cast<cplx>()).matrix();
      const RVec grad = (G.adjoint() * ratio).real() + d;
      RVec next;
      double f_next = 0.0;
      for (int bt = 0; bt < 60; ++bt) {
        next = project_simplex(y - grad / L);
        const RVec diff = next - y;
        f_next = smooth(next, nullptr);
        if (f_next <= fy + grad.dot(diff) + 0.5 * L * diff.squaredNorm() + 1e-14 * std::abs(fy)) break;
        L *= 2.0;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      if (f_next > f_lam) {
        // Adaptive restart of the momentum.
        y = lam;
        t = 1.0;
        L *= 2.0;
        continue;
      }
      const double step = (next - lam).norm();
      y = next + ((t - 1.0) / t_next) * (next - lam);
      lam = next;
      f_lam = f_next;
      t = t_next;
      L *= 0.95;

      const CVec cl = G * lam.cast<cplx>();
      consider(hard_point(cl, best.x));
      CVec soft = (cl.array() / (cl.cwiseAbs2().array() + delta * delta).sqrt().cast<cplx>()).matrix();
      consider(soft);
      best.upper_bound = std::min(best.upper_bound, dual(lam));
      if (done() || step < 1e-15) break;
    }
  }
  best.iterations = it;
  return best;
}

DiskSolution sumlog_affine_disk(const std::vector<CVec>& g, const RVec& d, const CVec& start,
                                double tol, int max_iter) {
  const auto K = static_cast<Eigen::Index>(g.size());
  const Eigen::Index M = start.size();
  if (K == 0 || d.size() != K) throw ShapeError("sumlog_affine_disk: empty or inconsistent input");
  CMat G(M, K);
  for (Eigen::Index k = 0; k < K; ++k) G.col(k) = g[static_cast<std::size_t>(k)];

  auto value = [&](const CVec& x, RVec* s_out) {
    const RVec s = (G.adjoint() * x).real() + d;
    if (s_out) *s_out = s;
    double total = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) total += clamp_log2p(s(k));
    return total;
  };
  auto gradient = [&](const RVec& s) {
    const RVec w = (1.0 / (kLn2 * (1.0 + s.array()))).matrix();
    return CVec(G * w.cast<cplx>());
  };

  DiskSolution best;
  best.x = start;
  best.value = value(start, nullptr);
  CVec x = start, y = start;
  double fx = best.value;
  RVec s0;
  value(start, &s0);
  double L = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double den = kLn2 * (1.0 + s0(k)) * (1.0 + s0(k));
    L += G.col(k).squaredNorm() / std::max(den, 1e-300);
  }
  L = std::max(L, 1e-12);
  double t = 1.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    RVec s;
    const double fy = value(y, &s);
    const CVec grad = gradient(s);
    CVec next;
    double f_next = -kInf;
    for (int bt = 0; bt < 60; ++bt) {
      next = project_disks(y + grad / L);
      const CVec diff = next - y;
      f_next = value(next, nullptr);
      if (std::isfinite(f_next) &&
          f_next >= fy + grad.dot(diff).real() - 0.5 * L * diff.squaredNorm() - 1e-14 * std::abs(fy))
        break;
      L *= 2.0;
    }
    if (!(f_next >= fx)) {
      y = x;
      t = 1.0;
      L *= 2.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double gain = f_next - fx;
    y = next + ((t - 1.0) / t_next) * (next - x);
    x = next;
    fx = f_next;
    t = t_next;
    L *= 0.95;
    if (fx > best.value) {
      best.value = fx;
      best.x = x;
    }
    if (gain <= tol * std::max(std::abs(fx), 1e-300)) break;
  }
  best.iterations = it;
  best.upper_bound = kInf;
  return best;
}

namespace {

// Barrier method for max obj(z) over |x_m| <= 1 where z = (Re x, Im x) and,
// in max-min mode, an extra epigraph variable t with s_k(z) >= t.
DiskSolution barrier_disk(const std::vector<CVec>& g, const RVec& d, const CVec& start, double tol,
                          int max_iter, bool maxmin) {
  const auto K = static_cast<Eigen::Index>(g.size());
  const Eigen::Index M = start.size();
  const char* name = maxmin ? "maxmin_affine_disk_ip" : "sumlog_affine_disk_ip";
  if (K == 0 || d.size() != K) throw ShapeError(std::string(name) + ": empty or inconsistent input");
  CMat G(M, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const CVec& gk = g[static_cast<std::size_t>(k)];
    if (gk.size() != M) throw ShapeError(std::string(name) + ": length mismatch");
    G.col(k) = gk;
  }
  // The max-min problem is scale invariant; solve it with O(1) coefficients.
  double scale = 1.0;
  if (maxmin) {
    scale = std::max(G.cwiseAbs().colwise().sum().maxCoeff(), d.cwiseAbs().maxCoeff());
    if (!(scale > 0.0)) scale = 1.0;
  }
  RMat Bm(2 * M, K);
  Bm.topRows(M) = G.real() / scale;
  Bm.bottomRows(M) = G.imag() / scale;
  const RVec dn = d / scale;
  auto exact = [&](const CVec& x) {
    const RVec s = (G.adjoint() * x).real() + d;
    if (maxmin) return s.minCoeff();
    double total = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) total += clamp_log2p(s(k));
    return total;
  };
  auto to_complex = [&](const RVec& z) {
    CVec x(M);
    for (Eigen::Index m = 0; m < M; ++m) x(m) = cplx(z(m), z(M + m));
    return x;
  };

  DiskSolution best;
  best.x = start;
  best.value = exact(start);
  best.upper_bound = kInf;

  const Eigen::Index n = 2 * M + (maxmin ? 1 : 0);
  const double constraints = static_cast<double>(M + (maxmin ? K : 0));

  // Barrier objective; returns -inf outside the domain.
  auto barrier = [&](const RVec& z, double tau) {
    double f = 0.0;
    for (Eigen::Index m = 0; m < M; ++m) {
      const double slack = 1.0 - z(m) * z(m) - z(M + m) * z(M + m);
      if (!(slack > 0.0)) return -kInf;
      f += std::log(slack);
    }
    const RVec s = Bm.transpose() * z.head(2 * M) + dn;
    if (maxmin) {
      const double t = z(2 * M);
      for (Eigen::Index k = 0; k < K; ++k) {
        if (!(s(k) - t > 0.0)) return -kInf;
        f += std::log(s(k) - t);
      }
      f += tau * t;
    } else {
      for (Eigen::Index k = 0; k < K; ++k) {
        if (!(1.0 + s(k) > 0.0)) return -kInf;
        f += tau * std::log(1.0 + s(k));
      }
    }
    return f;
  };

  // Strictly feasible start away from the disk boundaries: the incoming point
  // shrunk towards the origin.
  RVec z(n);
  bool feasible = false;
  for (double shrink : {0.5, 0.25, 0.0, 0.9, 0.99, 1.0 - 1e-4}) {
    z.head(M) = shrink * start.real();
    z.segment(M, M) = shrink * start.imag();
    if (maxmin) {
      const RVec s = Bm.transpose() * z.head(2 * M) + dn;
      z(2 * M) = s.minCoeff() - 0.1;
    }
    if (std::isfinite(barrier(z, 1.0))) {
      feasible = true;
      break;
    }
  }
  if (!feasible) return best;

  auto objective_of = [&](const RVec& zz) {
    if (maxmin) return zz(2 * M);
    const RVec s = Bm.transpose() * zz.head(2 * M) + dn;
    return (1.0 + s.array()).log().sum();
  };

  double tau = constraints / std::max(1.0, std::abs(objective_of(z)));
  int it = 0;
  RVec grad(n);
  RMat H(n, n);
  while (it < max_iter) {
    for (int newton = 0; newton < 100 && it < max_iter; ++newton, ++it) {
      grad.setZero();
      H.setZero();
      for (Eigen::Index m = 0; m < M; ++m) {
        const double a = z(m), b = z(M + m);
        const double slack = 1.0 - a * a - b * b;
        grad(m) -= 2.0 * a / slack;
        grad(M + m) -= 2.0 * b / slack;
        const double c1 = 2.0 / slack, c2 = 4.0 / (slack * slack);
        H(m, m) -= c1 + c2 * a * a;
        H(M + m, M + m) -= c1 + c2 * b * b;
        H(m, M + m) -= c2 * a * b;
        H(M + m, m) -= c2 * a * b;
      }
      const RVec s = Bm.transpose() * z.head(2 * M) + dn;
      if (maxmin) {
        const double t = z(2 * M);
        RVec w = (1.0 / (s.array() - t)).matrix();
        grad.head(2 * M) += Bm * w;
        grad(2 * M) += tau - w.sum();
        const RVec w2 = w.cwiseAbs2();
        H.topLeftCorner(2 * M, 2 * M) -= Bm * w2.asDiagonal() * Bm.transpose();
        const RVec cross = Bm * w2;
        H.col(2 * M).head(2 * M) += cross;
        H.row(2 * M).head(2 * M) += cross.transpose();
        H(2 * M, 2 * M) -= w2.sum();
      } else {
        const RVec w = (tau / (1.0 + s.array())).matrix();
        grad += Bm * w;
        const RVec w2 = (w.array() / (1.0 + s.array())).matrix();
        H -= Bm * w2.asDiagonal() * Bm.transpose();
      }
      const Eigen::LDLT<RMat> ldlt(-H);
      const RVec step = ldlt.solve(grad);
      const double decrement = grad.dot(step);
      if (!std::isfinite(decrement) || decrement < 2e-12) break;
      const double f0 = barrier(z, tau);
      double alpha = 1.0;
      RVec next;
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt, alpha *= 0.5) {
        next = z + alpha * step;
        const double f1 = barrier(next, tau);
        if (std::isfinite(f1) && f1 >= f0 + 0.25 * alpha * decrement) {
          moved = true;
          break;
        }
      }
      if (!moved) break;
      const double f1 = barrier(next, tau);
      z = next;
      if (f1 - f0 <= 1e-15 * std::abs(f0)) break;
    }
    const double gap = constraints / tau;
    if (gap <= tol * std::max(1.0, std::abs(objective_of(z)))) break;
    tau *= 10.0;
  }

  const CVec x = to_complex(z.head(2 * M));
  const double v = exact(x);
  best.iterations = it;
  best.upper_bound = v + constraints / tau * (maxmin ? scale : 1.0 / kLn2);
  if (v > best.value) {
    best.value = v;
    best.x = x;
  }
  return best;
}

}  // namespace

DiskSolution maxmin_affine_disk_ip(const std::vector<CVec>& g, const RVec& d, const CVec& start,
                                   double tol, int max_iter) {
  return barrier_disk(g, d, start, tol, max_iter, true);
}

DiskSolution sumlog_affine_disk_ip(const std::vector<CVec>& g, const RVec& d, const CVec& start,
                                   double tol, int max_iter) {
  return barrier_disk(g, d, start, tol, max_iter, false);
}

CVec solve_p4_4(const std::vector<BeamPattern>& patterns, const std::vector<CMat>& Xi,
                const RMat& X, const PhaseProfile& profile_l, const BcdConfig& cfg) {
  return sca_block(patterns, Xi, X, profile_l, cfg, Block::kPhi);
}

CVec solve_p4_5(const std::vector<BeamPattern>& patterns, const std::vector<CMat>& Xi,
                const RMat& X, const PhaseProfile& profile_l, const BcdConfig& cfg) {
  return sca_block(patterns, Xi, X, profile_l, cfg, Block::kTheta);
}

BcdResult bcd_solve_from(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                         const BcdConfig& cfg, const PhaseProfile& start, const RMat& X0) {
  validate_bcd_config(cfg);
  if (patterns.empty()) throw ShapeError("bcd: no beam patterns");
  if (X0.rows() != stats.K() || X0.cols() != static_cast<Eigen::Index>(patterns.size()))
    throw ShapeError("bcd: initial schedule shape mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<CMat>& Xi = stats.Xi;

  BcdResult res;
  PhaseProfile p = start;
  RMat X = X0;
  RMat q = compute_q(patterns, Xi, p);
  double rho = cfg.rho0;
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    rho *= cfg.zeta;
    double previous = bcd_block_objective(q, X, cfg.objective) - rho * penalty_h(X);
    for (int inner = 0; inner < cfg.max_inner; ++inner) {
      X = solve_p4_2(q, X, rho, cfg).X;
      p.phi = solve_p4_4(patterns, Xi, X, p, cfg);
      if (p.theta.size() > 0) p.theta = solve_p4_5(patterns, Xi, X, p, cfg);
      q = compute_q(patterns, Xi, p);
      const double h = penalty_h(X);
      const double mu = bcd_block_objective(q, X, cfg.objective);
      const double current = mu - rho * h;
      BcdTraceRow row;
      row.outer = outer;
      row.inner = inner;
      row.rho = rho;
      row.mu = mu;
      row.h = h;
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      res.trace.push_back(row);
      ++res.iterations;
      const double rel = (current - previous) / std::max(std::abs(previous), 1e-300);
      previous = current;
      if (rel < cfg.eps1) break;
    }
    if (penalty_h(X) < cfg.eps2) {
      res.converged = true;
      break;
    }
  }

  res.relaxed_mu = bcd_block_objective(q, X, cfg.objective);
  res.final_h = penalty_h(X);
  res.schedule = threshold_schedule(X);
  res.profile.phi = normalize_phases(p.phi);
  res.profile.theta = normalize_phases(p.theta);

  const RMat q_final = compute_q(patterns, Xi, res.profile);
  for (int k = 0; k < stats.K(); ++k) {
    const int u = res.schedule.assigned(k);
    const double before = q(k, u);
    const double after = q_final(k, u);
    res.relaxation_change =
        std::max(res.relaxation_change, std::abs(after - before) / std::max(before, 1e-300));
  }
  const RMat rates = q_final.unaryExpr([](double s) { return rate_from_snr(s); });
  res.objective = objectives(res.schedule, rates, cfg.total_time);
  return res;
}

BcdResult bcd_solve(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                    const BcdConfig& cfg, std::uint64_t seed) {
  if (patterns.empty()) throw ShapeError("bcd: no beam patterns");
  BcdResult best;
  int iterations = 0;
  for (int i = 0; i < cfg.starts; ++i) {
    Rng rng(i == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(i)));
    PhaseProfile start;
    start.phi = random_unit_modulus(rng, stats.M());
    start.theta = random_unit_modulus(rng, patterns.front().N());
    BcdResult r = bcd_solve_from(stats, patterns, cfg, start,
                                 Schedule::uniform(stats.K(), static_cast<int>(patterns.size())).X);
    iterations += r.iterations;
    const auto score = [&](const BcdResult& x) {
      return cfg.objective == Objective::kMinRate ? x.objective.min_rate : x.objective.throughput;
    };
    if (i == 0 || score(r) > score(best)) best = std::move(r);
  }
  best.iterations = iterations;
  return best;
}

}  // namespace mis

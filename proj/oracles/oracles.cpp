#include "oracles.hpp"

#include <cmath>

#include "mis/random.hpp"

namespace mis::oracle {

double quad_form(const CMat& Xi, const CVec& v) {
  cplx acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    for (Eigen::Index j = 0; j < v.size(); ++j) acc += std::conj(v(i)) * Xi(i, j) * v(j);
  return acc.real();
}

McMean mc_snr_mean(const ChannelStats& stats, const CVec& v, int k, long trials, std::uint64_t seed) {
  Rng rng(seed);
  double sum = 0.0, sum2 = 0.0;
  const int M = stats.M(), L = stats.L();
  for (long t = 0; t < trials; ++t) {
    const ChannelRealization ch = draw_channel(stats, rng);
    const CVec& h = ch.h[static_cast<std::size_t>(k)];
    double g = 0.0;
    for (int l = 0; l < L; ++l) {
      cplx c = 0.0;
      for (int m = 0; m < M; ++m) c += std::conj(ch.G(m, l)) * h(m) * v(m);
      g += std::norm(c);
    }
    g *= stats.iota[static_cast<std::size_t>(k)];
    sum += g;
    sum2 += g * g;
  }
  McMean out;
  out.mean = sum / static_cast<double>(trials);
  const double var = std::max(0.0, sum2 / static_cast<double>(trials) - out.mean * out.mean);
  out.std_error = std::sqrt(var / static_cast<double>(trials));
  return out;
}

TangentVector fd_gradient(const std::function<double(const ManifoldPoint&)>& f,
                          const ManifoldPoint& x, double h) {
  TangentVector g;
  auto circle = [&](CVec ManifoldPoint::*member, CVec& out) {
    const CVec& base = x.*member;
    out = CVec::Zero(base.size());
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      ManifoldPoint p = x, q = x;
      (p.*member)(i) += cplx(h, 0.0);
      (q.*member)(i) -= cplx(h, 0.0);
      const double re = (f(p) - f(q)) / (2.0 * h);
      p = x;
      q = x;
      (p.*member)(i) += cplx(0.0, h);
      (q.*member)(i) -= cplx(0.0, h);
      const double im = (f(p) - f(q)) / (2.0 * h);
      out(i) = cplx(re, im);
    }
  };
  circle(&ManifoldPoint::phi, g.phi);
  circle(&ManifoldPoint::theta, g.theta);
  for (std::size_t b = 0; b < x.blocks.size(); ++b) {
    RMat out = RMat::Zero(x.blocks[b].rows(), x.blocks[b].cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        ManifoldPoint p = x, q = x;
        p.blocks[b](i, j) += h;
        q.blocks[b](i, j) -= h;
        out(i, j) = (f(p) - f(q)) / (2.0 * h);
      }
    g.blocks.push_back(out);
  }
  return g;
}

double gradient_rel_error(const TangentVector& a, const TangentVector& b) {
  double diff = 0.0, scale = 0.0;
  auto add_c = [&](const CVec& x, const CVec& y) {
    if (x.size() != y.size()) throw ShapeError("gradient_rel_error: shape mismatch");
    diff += (x - y).squaredNorm();
    scale = std::max({scale, x.squaredNorm(), y.squaredNorm()});
  };
  add_c(a.phi, b.phi);
  add_c(a.theta, b.theta);
  if (a.blocks.size() != b.blocks.size()) throw ShapeError("gradient_rel_error: block count mismatch");
  double block_scale = 0.0;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    diff += (a.blocks[i] - b.blocks[i]).squaredNorm();
    block_scale += std::max(a.blocks[i].squaredNorm(), b.blocks[i].squaredNorm());
  }
  scale = std::max(scale, block_scale);
  return scale > 0.0 ? std::sqrt(diff / scale) : std::sqrt(diff);
}

namespace {

double score_of(const std::vector<double>& best, Objective objective, double total_time) {
  double mn = best.front(), sum = 0.0;
  for (double r : best) {
    mn = std::min(mn, r);
    sum += r;
  }
  return objective == Objective::kMinRate ? mn : total_time / static_cast<double>(best.size()) * sum;
}

CVec composite(const BeamPattern& p, const CVec& theta, const CVec& phi) {
  CVec v = phi;
  for (std::size_t n = 0; n < p.ms1_index.size(); ++n) {
    const int m = p.ms1_index[n];
    v(m) = phi(m) * theta(static_cast<Eigen::Index>(n));
  }
  return v;
}

}  // namespace

double greedy_score(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                    const CVec& phi, const CVec& theta, Objective objective, double total_time) {
  std::vector<double> best(static_cast<std::size_t>(stats.K()), -1.0);
  for (const auto& p : patterns) {
    const CVec v = composite(p, theta, phi);
    for (int k = 0; k < stats.K(); ++k) {
      const double r = std::log2(1.0 + std::max(0.0, quad_form(stats.Xi[static_cast<std::size_t>(k)], v)));
      if (r > best[static_cast<std::size_t>(k)]) best[static_cast<std::size_t>(k)] = r;
    }
  }
  return score_of(best, objective, total_time);
}

QuantizedOptimum exhaustive_quantized(const ChannelStats& stats,
                                      const std::vector<BeamPattern>& patterns, int bits_phi,
                                      int bits_theta, Objective objective, double total_time) {
  const int M = stats.M();
  const int N = patterns.front().N();
  const int Lp = 1 << bits_phi, Lt = 1 << bits_theta;
  std::vector<int> digits(static_cast<std::size_t>(M + N), 0);
  QuantizedOptimum best;
  best.score = -1.0;
  CVec phi(M), theta(N);
  while (true) {
    for (int m = 0; m < M; ++m)
      phi(m) = std::polar(1.0, 2.0 * kPi * (digits[static_cast<std::size_t>(m)] + 1) / Lp);
    for (int n = 0; n < N; ++n)
      theta(n) = std::polar(1.0, 2.0 * kPi * (digits[static_cast<std::size_t>(M + n)] + 1) / Lt);
    const double s = greedy_score(stats, patterns, phi, theta, objective, total_time);
    ++best.combinations;
    if (s > best.score) {
      best.score = s;
      best.phi = phi;
      best.theta = theta;
    }
    std::size_t i = 0;
    for (; i < digits.size(); ++i) {
      const int base = static_cast<int>(i) < M ? Lp : Lt;
      if (++digits[i] < base) break;
      digits[i] = 0;
    }
    if (i == digits.size()) break;
  }
  return best;
}

double brute_force_maxmin_assignment(const RMat& q) {
  const auto K = q.rows(), U = q.cols();
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(K), 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    double mn = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < K; ++k) mn = std::min(mn, q(k, pick[static_cast<std::size_t>(k)]));
    best = std::max(best, mn);
    Eigen::Index i = 0;
    for (; i < K; ++i) {
      if (++pick[static_cast<std::size_t>(i)] < U) break;
      pick[static_cast<std::size_t>(i)] = 0;
    }
    if (i == K) break;
  }
  return best;
}

double grid_max_quadratic(const CMat& Xi, int steps) {
  const auto M = Xi.rows();
  std::vector<int> digits(static_cast<std::size_t>(std::max<Eigen::Index>(M - 1, 0)), 0);
  CVec v = CVec::Ones(M);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    for (Eigen::Index m = 1; m < M; ++m)
      v(m) = std::polar(1.0, 2.0 * kPi * digits[static_cast<std::size_t>(m - 1)] / steps);
    best = std::max(best, quad_form(Xi, v));
    std::size_t i = 0;
    for (; i < digits.size(); ++i) {
      if (++digits[i] < steps) break;
      digits[i] = 0;
    }
    if (i == digits.size()) break;
  }
  return best;
}

double grid_best_profile(const ChannelStats& stats, const std::vector<BeamPattern>& patterns,
                         Objective objective, double total_time, int steps) {
  const int M = stats.M();
  const int N = patterns.front().N();
  std::vector<int> digits(static_cast<std::size_t>(M - 1 + N), 0);
  CVec phi = CVec::Ones(M), theta = CVec::Ones(N);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    for (int m = 1; m < M; ++m)
      phi(m) = std::polar(1.0, 2.0 * kPi * digits[static_cast<std::size_t>(m - 1)] / steps);
    for (int n = 0; n < N; ++n)
      theta(n) = std::polar(1.0, 2.0 * kPi * digits[static_cast<std::size_t>(M - 1 + n)] / steps);
    best = std::max(best, greedy_score(stats, patterns, phi, theta, objective, total_time));
    std::size_t i = 0;
    for (; i < digits.size(); ++i) {
      if (++digits[i] < steps) break;
      digits[i] = 0;
    }
    if (i == digits.size()) break;
  }
  return best;
}

double alignment_max(const CVec& c) {
  double s = 0.0;
  for (Eigen::Index m = 0; m < c.size(); ++m) s += std::abs(c(m));
  return s * s;
}

}  // namespace mis::oracle

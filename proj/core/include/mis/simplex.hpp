#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "mis/types.hpp"

namespace mis {

/// Euclidean projection of y onto {x >= 0, sum x = 1} (sort-based).
inline RVec project_simplex(const RVec& y) {
  const auto n = y.size();
  std::vector<double> s(y.data(), y.data() + n);
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cumulative += s[static_cast<std::size_t>(i)];
    const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (s[static_cast<std::size_t>(i)] - t > 0.0) tau = t;
  }
  return (y.array() - tau).cwiseMax(0.0).matrix();
}

/// Projection followed by flooring at `floor` and renormalization, which keeps
/// every entry strictly positive.
inline RVec project_simplex_positive(const RVec& y, double floor) {
  RVec x = project_simplex(y).cwiseMax(floor);
  return x / x.sum();
}

}  // namespace mis

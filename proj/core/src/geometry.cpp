#include "mis/geometry.hpp"

#include <cmath>
#include <string>

namespace mis {

namespace {

std::vector<Vec3> grid(int rows, int cols, double pitch) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out.emplace_back(r * pitch, c * pitch, 0.0);
  return out;
}

void require_positive(int value, const char* field) {
  if (value <= 0) throw InvalidLayout(field, "must be positive, got " + std::to_string(value));
}

void check_unit_modulus(const CVec& x, const char* name) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(std::abs(x(i)) - 1.0) > 1e-9)
      throw DomainError(std::string(name) + " entry " + std::to_string(i) + " is not unit modulus");
  }
}

}  // namespace

RMat BeamPattern::selection() const {
  RMat s = RMat::Zero(M(), N());
  for (int n = 0; n < N(); ++n) s(ms1_index[n], n) = 1.0;
  return s;
}

CVec BeamPattern::overlay(const CVec& theta) const {
  if (theta.size() != N())
    throw ShapeError("theta has length " + std::to_string(theta.size()) + ", pattern expects " +
                     std::to_string(N()));
  CVec out = padding.cast<cplx>();
  for (int n = 0; n < N(); ++n) out(ms1_index[n]) += theta(n);
  return out;
}

MisLayout build_layout(const LayoutConfig& cfg) {
  require_positive(cfg.ms1_rows, "ms1_rows");
  require_positive(cfg.ms1_cols, "ms1_cols");
  require_positive(cfg.bs_antennas, "bs_antennas");
  const bool no_ms2 = cfg.ms2_rows == 0 && cfg.ms2_cols == 0;
  if (!no_ms2) {
    require_positive(cfg.ms2_rows, "ms2_rows");
    require_positive(cfg.ms2_cols, "ms2_cols");
    if (cfg.ms2_rows > cfg.ms1_rows)
      throw InvalidLayout("ms2_rows", "exceeds ms1_rows (" + std::to_string(cfg.ms1_rows) + ")");
    if (cfg.ms2_cols > cfg.ms1_cols)
      throw InvalidLayout("ms2_cols", "exceeds ms1_cols (" + std::to_string(cfg.ms1_cols) + ")");
  }
  if (!(cfg.spacing > 0.0)) throw InvalidLayout("spacing", "must be positive");
  if (!(cfg.wavelength > 0.0)) throw InvalidLayout("wavelength", "must be positive");
  if (!(cfg.bs_spacing > 0.0)) throw InvalidLayout("bs_spacing", "must be positive");

  MisLayout out;
  out.ms1_rows = cfg.ms1_rows;
  out.ms1_cols = cfg.ms1_cols;
  out.ms2_rows = no_ms2 ? 0 : cfg.ms2_rows;
  out.ms2_cols = no_ms2 ? 0 : cfg.ms2_cols;
  out.bs_antennas = cfg.bs_antennas;
  out.spacing = cfg.spacing;
  out.wavelength = cfg.wavelength;
  out.ms1_positions = grid(cfg.ms1_rows, cfg.ms1_cols, cfg.spacing);
  out.ms2_rel_positions = grid(out.ms2_rows, out.ms2_cols, cfg.spacing);
  // BS: uniform linear array along x.
  out.bs_positions = grid(cfg.bs_antennas, 1, cfg.bs_spacing);
  return out;
}

std::vector<BeamPattern> enumerate_patterns(const MisLayout& layout) {
  const int M = layout.M();
  if (layout.N() == 0) return {single_layer_pattern(M)};

  const int ur_count = layout.pattern_rows();
  const int uc_count = layout.pattern_cols();
  std::vector<BeamPattern> out;
  out.reserve(static_cast<std::size_t>(ur_count) * uc_count);
  for (int ur = 1; ur <= ur_count; ++ur) {
    for (int uc = 1; uc <= uc_count; ++uc) {
      BeamPattern p;
      p.index = (ur - 1) * uc_count + uc;
      p.row_shift = ur;
      p.col_shift = uc;
      p.padding = RVec::Ones(M);
      p.ms1_index.reserve(static_cast<std::size_t>(layout.N()));
      for (int nr = 0; nr < layout.ms2_rows; ++nr) {
        for (int nc = 0; nc < layout.ms2_cols; ++nc) {
          const int m = (ur - 1 + nr) * layout.ms1_cols + (uc - 1 + nc);
          p.ms1_index.push_back(m);
          p.padding(m) = 0.0;
        }
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

BeamPattern single_layer_pattern(int M) {
  BeamPattern p;
  p.padding = RVec::Ones(M);
  return p;
}

CVec composite_phase(const BeamPattern& pattern, const CVec& theta, const CVec& phi) {
  if (phi.size() != pattern.M())
    throw ShapeError("phi has length " + std::to_string(phi.size()) + ", pattern expects " +
                     std::to_string(pattern.M()));
  return pattern.overlay(theta).cwiseProduct(phi);
}

CVec effective_phase(const BeamPattern& pattern, const CVec& theta, const CVec& phi) {
  CVec v = composite_phase(pattern, theta, phi);
  check_unit_modulus(theta, "theta");
  check_unit_modulus(phi, "phi");
  return v;
}

}  // namespace mis

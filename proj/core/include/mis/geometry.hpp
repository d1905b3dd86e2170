#pragma once

#include <vector>

#include "mis/types.hpp"

namespace mis {

/// Dimensions of the two stacked surfaces and the BS array.
///
/// `ms2_rows == ms2_cols == 0` denotes a surface without a movable layer
/// (the single-layer static surface); every other count must be positive.
struct LayoutConfig {
  int ms1_rows = 6;
  int ms1_cols = 6;
  int ms2_rows = 4;
  int ms2_cols = 4;
  int bs_antennas = 4;
  double spacing = 0.0125;     // element pitch in meters
  double wavelength = 0.05;    // meters
  double bs_spacing = 0.025;   // BS antenna pitch in meters
};

struct MisLayout {
  int ms1_rows = 0;
  int ms1_cols = 0;
  int ms2_rows = 0;
  int ms2_cols = 0;
  int bs_antennas = 0;
  double spacing = 0.0;
  double wavelength = 0.0;
  std::vector<Vec3> ms1_positions;
  std::vector<Vec3> ms2_rel_positions;
  std::vector<Vec3> bs_positions;

  int M() const { return ms1_rows * ms1_cols; }
  int N() const { return ms2_rows * ms2_cols; }
  int L() const { return bs_antennas; }
  int pattern_rows() const { return N() == 0 ? 1 : ms1_rows - ms2_rows + 1; }
  int pattern_cols() const { return N() == 0 ? 1 : ms1_cols - ms2_cols + 1; }
  int U() const { return pattern_rows() * pattern_cols(); }
};

/// One overlap position of MS2 on MS1.
///
/// The selection matrix is kept as an index map: `ms1_index[n]` is the
/// (0-based) MS1 element covered by MS2 element n. `padding(m)` is 1 where
/// MS1 is uncovered.
struct BeamPattern {
  int index = 1;       // u, 1-based
  int row_shift = 1;   // u_r, 1-based
  int col_shift = 1;   // u_c, 1-based
  std::vector<int> ms1_index;
  RVec padding;

  int M() const { return static_cast<int>(padding.size()); }
  int N() const { return static_cast<int>(ms1_index.size()); }

  /// Dense M x N binary selection matrix.
  RMat selection() const;
  /// S theta + e for an arbitrary (not necessarily unit-modulus) theta.
  CVec overlay(const CVec& theta) const;
};

MisLayout build_layout(const LayoutConfig& cfg);

/// All U patterns, ordered by u = (u_r - 1) U_c + u_c.
std::vector<BeamPattern> enumerate_patterns(const MisLayout& layout);

/// The single pattern of a surface with no movable layer: S is M x 0, e = 1.
BeamPattern single_layer_pattern(int M);

/// v_u = (S_u theta + e_u) .* phi for unit-modulus inputs.
CVec effective_phase(const BeamPattern& pattern, const CVec& theta, const CVec& phi);

/// Same product without the unit-modulus precondition (relaxed iterates).
CVec composite_phase(const BeamPattern& pattern, const CVec& theta, const CVec& phi);

}  // namespace mis

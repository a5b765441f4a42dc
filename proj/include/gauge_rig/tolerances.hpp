#pragma once

#include <string_view>

namespace gauge_rig {

// Numerical thresholds shared by the analysis and integration routines.
struct Tolerances {
  // Singular values below rank_epsilon * sigma_max * edge_count count as zero.
  double rank_epsilon = 1e-10;
  // |u . rhs| <= solvability * |u| * |rhs| for every self-stress u.
  double solvability = 1e-9;
  // Compatibility of the multiplier-rate system; larger means off-manifold.
  double tangency = 1e-7;
  // Max relative length residual |c1| / l^2 accepted before projecting.
  double projection_gate = 1e-2;
  // Newton stopping threshold on |c1| / l^2.
  double projection_target = 1e-14;
  int projection_max_iterations = 50;
  // Residual level above which an input point is reported as off-manifold.
  double manifold_warning = 1e-8;
};

/// Parses a comma-separated override list such as
/// "rank_epsilon=1e-12,tangency=1e-6" on top of `base`.
/// Unknown keys or malformed numbers throw ParseError.
Tolerances parse_tolerance_overrides(std::string_view spec, Tolerances base = {});

/// Applies GAUGE_RIG_TOL from the environment, if set.
Tolerances tolerances_from_environment(Tolerances base = {});

}  // namespace gauge_rig

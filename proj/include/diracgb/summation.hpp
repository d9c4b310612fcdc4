#pragma once

#include "diracgb/beams.hpp"
#include "diracgb/field.hpp"

namespace dgb {

/// u0 exp(i T / eps) with T = S + xi.(x - y) + (x - y)^T M (x - y) / 2.
Spinor evaluate_beam(const BeamState& s, const VecD& x, double eps);

/// Cut-off equal to 1 for |r| <= theta, 0 for |r| >= 2 theta, with a C^2
/// quintic smoothstep in between.
double truncation_r(double r_norm, double theta);
double truncation_r(const VecD& r, double theta);

/// max(3 sqrt(eps / mu_min), 5 sqrt(eps)) with mu_min the smallest
/// eigenvalue of Im M across the set.
double default_theta(const BeamSet& bs);

/// Superposition (2 pi eps)^{-d/2} sum_j r_theta(x - y_j) phi_j(x) w_j over
/// both branches on every node of `grid`. The grid must have bs.dim axes;
/// pinned axes evaluate a slice. Each node accumulates beams in set order.
/// Gaussian factors below e^{-40} are skipped.
Field sum_beams(const BeamSet& bs, const Grid& grid, double theta);

}  // namespace dgb

#pragma once

#include <cstddef>
#include <vector>

#include "diracgb/field.hpp"
#include "diracgb/initial_data.hpp"
#include "diracgb/potential.hpp"
#include "diracgb/types.hpp"

namespace dgb {

/// How the divergence of omega = grad_xi h enters the amplitude law along a
/// beam. Total differentiates through xi = grad T (tr h_xiy + tr(h_xixi M)),
/// which gives u0 ~ det(P)^{-1/2}; Partial keeps only tr h_xiy.
enum class DivergenceMode { Total, Partial };

/// One first-order Gaussian beam. M = R P^{-1} is the complex phase Hessian.
struct BeamState {
  VecD y;
  VecD xi;
  double S = 0.0;
  MatDc P;
  MatDc R;
  Spinor u0 = Spinor::Zero();
  Branch branch = Branch::Plus;
  VecD y0;
  double weight = 0.0;

  int dim() const { return static_cast<int>(y.size()); }
};

struct BeamDerivative {
  VecD dy;
  VecD dxi;
  double dS = 0.0;
  MatDc dP;
  MatDc dR;
  Spinor du0;
};

struct BeamSet {
  std::vector<BeamState> beams;
  double epsilon = 0.0;
  double t = 0.0;
  int dim = 0;

  std::size_t count(Branch b) const;
};

struct BeamOptions {
  /// Beams with |u0| below this fraction of the largest |u0| are omitted.
  double drop_threshold = 1e-8;
  DivergenceMode divergence = DivergenceMode::Total;
  /// Check the beam invariants after every step.
  bool check_invariants = true;
  double min_det_P = 1e-12;
  double symmetry_tol = 1e-8;
  /// Relative tolerance on |Pi^{-+} u0|.
  double projector_tol = 1e-6;
};

/// Beams centred on every node of `y0_grid`, one per branch, with
/// y = y0, xi = grad S_I, S = S_I, P = I, R = hess S_I + iI and
/// u0 = Pi(y0, grad S_I) u_I. weight is the cell volume of the grid.
BeamSet init_beams(const InitialData& data, const Grid& y0_grid, double eps, const PotentialModel& pot,
                   const BeamOptions& opts = {});

BeamDerivative beam_rhs(const BeamState& s, const PotentialModel& pot,
                        DivergenceMode mode = DivergenceMode::Total);

/// Classical RK4 from bs.t to t_final with step dt; the final step is
/// shortened to land on t_final. Throws InvariantViolation naming the beam
/// index and time when an invariant fails.
BeamSet evolve(BeamSet bs, double t_final, double dt, const PotentialModel& pot, const BeamOptions& opts = {});

/// Advances one beam by a single RK4 step.
BeamState rk4_step(const BeamState& s, double dt, const PotentialModel& pot,
                   DivergenceMode mode = DivergenceMode::Total);

/// M = R P^{-1}, symmetrised after checking the asymmetry.
MatDc hessian_of(const BeamState& s, double symmetry_tol = 1e-8);

/// Smallest eigenvalue of Im M.
double min_imag_hessian_eig(const MatDc& M);

/// Throws InvariantViolation if |det P|, the symmetry of M, positivity of
/// Im M or projector preservation fails.
void check_beam(const BeamState& s, std::size_t index, double t, const PotentialModel& pot,
                const BeamOptions& opts = {});

/// Equidistant beam mesh covering [lo, hi]^d with spacing close to `spacing`;
/// the mesh always contains the box centre.
Grid beam_mesh(int d, double lo, double hi, double spacing);

}  // namespace dgb

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "diracgb/beams.hpp"
#include "diracgb/field.hpp"
#include "diracgb/initial_data.hpp"
#include "diracgb/potential.hpp"

namespace dgb {

/// Closed tensor grid over (y, xi): axes 0..d-1 are y, axes d..2d-1 are xi.
Grid phase_grid(int d, double y_lo, double y_hi, std::size_t ny, double xi_lo, double xi_hi, std::size_t nxi);

/// Level-set data of one branch on a phase grid.
struct PhaseSpaceFields {
  Grid grid;
  int dim = 1;
  Branch branch = Branch::Plus;
  double t = 0.0;
  std::vector<Complex> phi;  // dim values per node
  std::vector<double> S;
  std::vector<Spinor> u0;
  /// Characteristic feet clamped back into the box, summed over all steps.
  std::size_t clamped = 0;
  /// Nodes whose grad_xi phi was numerically singular in the last step.
  std::size_t singular = 0;

  std::size_t size() const { return S.size(); }
  VecD y(std::size_t node) const;
  VecD xi(std::size_t node) const;
};

/// How the initial amplitude is projected.
enum class AmplitudeInit {
  Pointwise,   // Pi(y, xi) u_I(y) at every node
  OnManifold,  // Pi(y, grad S_I(y)) u_I(y), independent of xi
};

/// phi = xi - grad S_I(y) - i y, S = S_I(y), u0 = Pi u_I(y). Throws
/// std::invalid_argument when d is not 1 or 2 or when the xi box does not
/// contain grad S_I over the y box with a margin of two delta widths.
PhaseSpaceFields init_phase_fields(const InitialData& data, const Grid& grid, Branch b, const PotentialModel& pot,
                                   AmplitudeInit mode = AmplitudeInit::Pointwise);

/// Moves (y, xi) backward along the flow of h for time dt with one RK4 step.
void trace_back(Branch b, VecD& y, VecD& xi, double dt, const PotentialModel& pot);

/// One semi-Lagrangian step of the Liouville equations for phi, S and u0.
PhaseSpaceFields liouville_step(const PhaseSpaceFields& f, double dt, const PotentialModel& pot,
                                DivergenceMode mode = DivergenceMode::Total);

/// Repeated liouville_step to t_final; the last step is shortened.
PhaseSpaceFields evolve_phase(PhaseSpaceFields f, double t_final, double dt, const PotentialModel& pot,
                              DivergenceMode mode = DivergenceMode::Total);

/// M = -(grad_y phi)(grad_xi phi)^{-1} from centred differences (one-sided on
/// the box faces), with (grad_y phi)(i, k) = d phi_k / d y_i. Throws
/// InvariantViolation when |det grad_xi phi| <= 1e-10.
MatDc hessian_from_levelset(const PhaseSpaceFields& f, std::size_t node);

/// prod_k (1 + cos(pi r_k / w_k)) / (2 w_k) for |r_k| < w_k, else 0.
double delta_kernel(const VecD& r, const VecD& w);

struct ReconstructInfo {
  std::size_t active = 0;         // nodes inside the delta support
  std::size_t near_boundary = 0;  // active nodes within one delta width of a xi face
  std::size_t skipped = 0;        // active nodes dropped for singular or non-decaying M
};

/// Delta-integral superposition of both branches on `eval`:
/// (2 pi eps)^{-d/2} sum_nodes r_theta(x - y) u0 e^{iT/eps} delta_w(Re phi) dy dxi
/// with w = width_factor * dxi per component. theta defaults to the
/// Lagrangian rule applied to the active nodes.
Field reconstruct(const PhaseSpaceFields& plus, const PhaseSpaceFields& minus, const Grid& eval, double eps,
                  std::optional<double> theta = std::nullopt, double width_factor = 2.0,
                  ReconstructInfo* info = nullptr);

/// Active nodes of one or two branches as weighted beams (plus first).
BeamSet levelset_beams(const std::vector<const PhaseSpaceFields*>& branches, double eps, double width_factor = 2.0,
                       ReconstructInfo* info = nullptr);

}  // namespace dgb

#pragma once

#include <array>

#include "diracgb/potential.hpp"
#include "diracgb/types.hpp"

namespace dgb {

struct DiracMatrices {
  std::array<Mat4c, 3> alpha;
  Mat4c beta;
};

/// alpha^k = [[0, sigma^k], [sigma^k, 0]], beta = diag(I2, -I2).
const DiracMatrices& dirac_matrices();

/// alpha . v for a (complex) 3-vector.
Mat4c alpha_dot(const Eigen::Vector3cd& v);
Mat4c alpha_dot(const Vec3& v);

/// D(x, xi) = alpha.(xi - A(x)) + beta + V(x) I.
Mat4c dirac_symbol(const PhasePoint& p, const PotentialModel& pot);

/// lambda(x, xi) = sqrt(|xi - A(x)|^2 + 1) >= 1.
double lambda(const PhasePoint& p, const PotentialModel& pot);

/// h(x, xi) = +-lambda + V.
double eigenvalue_h(Branch b, const PhasePoint& p, const PotentialModel& pot);

/// 1/2 (I +- (D - V I) / lambda).
Mat4c projector(Branch b, const PhasePoint& p, const PotentialModel& pot);

/// Closed-form derivatives of h on the live d x d block.
/// hess_yxi(i, m) = d^2 h / (d y_i d xi_m); the (xi, y) block is its transpose.
struct HDerivatives {
  double value = 0.0;
  double lambda = 1.0;
  VecD grad_y;
  VecD grad_xi;
  MatD hess_yy;
  MatD hess_yxi;
  MatD hess_xixi;

  MatD hess_xiy() const { return hess_yxi.transpose(); }
};

HDerivatives h_derivatives(Branch b, const PhasePoint& p, const PotentialModel& pot);

/// Same derivatives on the full padded 3 x 3 blocks.
struct HDerivatives3 {
  double value;
  double lambda;
  Vec3 grad_y;
  Vec3 grad_xi;
  Mat3 hess_yy;
  Mat3 hess_yxi;
  Mat3 hess_xixi;
};

HDerivatives3 h_derivatives3(Branch b, const Vec3& x, const Vec3& xi, const PotentialModel& pot);

/// Matrix coefficient of the amplitude transport law, with L = +-lambda the
/// kinetic part of h on the chosen branch:
///   sum_{k != l} alpha^k alpha^l dA_l/dx_k / (2 L)
///   - alpha . grad_x h / (2 L)
///   - alpha . q / (2 lambda^2)
///   + (xi - A) . (q + L grad_x h) / (2 L^3) I
/// where q_k = sum_l (xi - A)_l dA_l/dx_k.
/// Pi^-+ A Pi^+- matches the rotation of the eigenspace along the flow, so
/// beams stay polarised, and Pi^+- A Pi^+- is anti-Hermitian.
Mat4c transport_matrix(Branch b, const PhasePoint& p, const PotentialModel& pot);

/// transport_matrix with the h derivatives already evaluated at (x, xi).
Mat4c transport_matrix(Branch b, const Vec3& x, const Vec3& xi, const HDerivatives3& hd, const PotentialModel& pot);

/// Reduced A = 0 form: -alpha.grad V / (2 L) + xi.grad V / (2 lambda^2) I.
Mat4c transport_matrix_unmagnetized(Branch b, const PhasePoint& p, const PotentialModel& pot);

struct Observables {
  double density = 0.0;
  Vec3 current = Vec3::Zero();
};

/// rho = |psi|^2, j_k = <psi, alpha^k psi>.
Observables observables(const Spinor& psi);

}  // namespace dgb

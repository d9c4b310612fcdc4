#include "diracgb/dirac.hpp"

#include <cmath>

namespace dgb {

namespace {

DiracMatrices build_matrices() {
  using M2 = Eigen::Matrix2cd;
  M2 s1, s2, s3;
  s1 << 0.0, 1.0, 1.0, 0.0;
  s2 << 0.0, -kI, kI, 0.0;
  s3 << 1.0, 0.0, 0.0, -1.0;

  DiracMatrices m;
  const std::array<M2, 3> sigma{s1, s2, s3};
  for (int k = 0; k < 3; ++k) {
    m.alpha[k] = Mat4c::Zero();
    m.alpha[k].topRightCorner<2, 2>() = sigma[k];
    m.alpha[k].bottomLeftCorner<2, 2>() = sigma[k];
  }
  m.beta = Mat4c::Zero();
  m.beta.diagonal() << 1.0, 1.0, -1.0, -1.0;
  return m;
}

MatD block(const Mat3& m, int d) { return m.topLeftCorner(d, d); }
VecD head(const Vec3& v, int d) { return v.head(d); }

}  // namespace

const DiracMatrices& dirac_matrices() {
  static const DiracMatrices m = build_matrices();
  return m;
}

Mat4c alpha_dot(const Eigen::Vector3cd& v) {
  const auto& m = dirac_matrices();
  return v[0] * m.alpha[0] + v[1] * m.alpha[1] + v[2] * m.alpha[2];
}

Mat4c alpha_dot(const Vec3& v) { return alpha_dot(Eigen::Vector3cd(v.cast<Complex>())); }

Mat4c dirac_symbol(const PhasePoint& p, const PotentialModel& pot) {
  const Vec3 kin = p.xi - pot.A(p.x);
  return alpha_dot(kin) + dirac_matrices().beta + pot.V(p.x) * Mat4c::Identity();
}

double lambda(const PhasePoint& p, const PotentialModel& pot) {
  return std::sqrt((p.xi - pot.A(p.x)).squaredNorm() + 1.0);
}

double eigenvalue_h(Branch b, const PhasePoint& p, const PotentialModel& pot) {
  return sign(b) * lambda(p, pot) + pot.V(p.x);
}

Mat4c projector(Branch b, const PhasePoint& p, const PotentialModel& pot) {
  const Vec3 kin = p.xi - pot.A(p.x);
  const double lam = std::sqrt(kin.squaredNorm() + 1.0);
  const Mat4c free_part = alpha_dot(kin) + dirac_matrices().beta;
  return 0.5 * (Mat4c::Identity() + (sign(b) / lam) * free_part);
}

HDerivatives3 h_derivatives3(Branch b, const Vec3& x, const Vec3& xi, const PotentialModel& pot) {
  const double s = sign(b);
  const Vec3 p = xi - pot.A(x);
  const double lam = std::sqrt(p.squaredNorm() + 1.0);
  const double inv = 1.0 / lam;
  const double inv3 = inv * inv * inv;

  HDerivatives3 out;
  out.lambda = lam;
  out.value = s * lam + pot.V(x);
  out.grad_xi = s * inv * p;
  out.hess_xixi = s * (inv * Mat3::Identity() - inv3 * p * p.transpose());

  if (!pot.has_magnetic()) {
    out.grad_y = pot.grad_V(x);
    out.hess_yy = pot.hess_V(x);
    out.hess_yxi = Mat3::Zero();
    return out;
  }

  const Mat3 J = pot.jac_A(x);
  const Vec3 Jp = J * p;
  out.grad_y = -s * inv * Jp + pot.grad_V(x);
  out.hess_yxi = s * (-inv * J + inv3 * Jp * p.transpose());

  const auto H = pot.hess_A(x);
  const Mat3 Hp = H[0] * p[0] + H[1] * p[1] + H[2] * p[2];
  const Mat3 d2lam = -inv * (Hp - J * J.transpose()) - inv3 * Jp * Jp.transpose();
  out.hess_yy = s * d2lam + pot.hess_V(x);
  return out;
}

HDerivatives h_derivatives(Branch b, const PhasePoint& p, const PotentialModel& pot) {
  const HDerivatives3 full = h_derivatives3(b, p.x, p.xi, pot);
  const int d = p.dim;
  HDerivatives out;
  out.value = full.value;
  out.lambda = full.lambda;
  out.grad_y = head(full.grad_y, d);
  out.grad_xi = head(full.grad_xi, d);
  out.hess_yy = block(full.hess_yy, d);
  out.hess_yxi = block(full.hess_yxi, d);
  out.hess_xixi = block(full.hess_xixi, d);
  return out;
}

Mat4c transport_matrix(Branch b, const PhasePoint& p, const PotentialModel& pot) {
  return transport_matrix(b, p.x, p.xi, h_derivatives3(b, p.x, p.xi, pot), pot);
}

Mat4c transport_matrix(Branch b, const Vec3& x, const Vec3& xi, const HDerivatives3& hd, const PotentialModel& pot) {
  const auto& dm = dirac_matrices();
  const double lam = hd.lambda;
  const double L = sign(b) * lam;
  const Vec3& grad_h = hd.grad_y;
  const Vec3 kin = xi - pot.A(x);
  const Mat3 J = pot.jac_A(x);
  const Vec3 q = J * kin;

  Mat4c out = Mat4c::Zero();
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l)
      if (k != l && J(k, l) != 0.0) out += (J(k, l) / (2.0 * L)) * (dm.alpha[k] * dm.alpha[l]);

  out -= alpha_dot(grad_h) / (2.0 * L);
  out -= alpha_dot(q) / (2.0 * lam * lam);
  out += (kin.dot(q + L * grad_h) / (2.0 * L * L * L)) * Mat4c::Identity();
  return out;
}

Mat4c transport_matrix_unmagnetized(Branch b, const PhasePoint& p, const PotentialModel& pot) {
  const double lam = std::sqrt(p.xi.squaredNorm() + 1.0);
  const Vec3 gv = pot.grad_V(p.x);
  return -alpha_dot(gv) / (2.0 * sign(b) * lam) + (p.xi.dot(gv) / (2.0 * lam * lam)) * Mat4c::Identity();
}

Observables observables(const Spinor& psi) {
  const auto& dm = dirac_matrices();
  Observables out;
  out.density = psi.squaredNorm();
  for (int k = 0; k < 3; ++k) out.current[k] = psi.dot(dm.alpha[k] * psi).real();
  return out;
}

}  // namespace dgb

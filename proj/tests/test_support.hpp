#pragma once

#include <cmath>
#include <random>

#include "diracgb/potential.hpp"

namespace dgb::testing {

/// Smooth random fields built from a few plane waves:
///   V(x)   = sum_m a_m sin(k_m . x + p_m)
///   A_l(x) = sum_m b_lm cos(q_lm . x + r_lm)
class TrigPotential final : public PotentialModel {
 public:
  TrigPotential(std::mt19937_64& rng, bool magnetic = true, int dim = 3) : magnetic_(magnetic) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int m = 0; m < kModes; ++m) {
      a_[m] = 0.5 * u(rng);
      p_[m] = 3.0 * u(rng);
      k_[m] = Vec3(1.5 * u(rng), 1.5 * u(rng), 1.5 * u(rng));
      for (int l = 0; l < 3; ++l) {
        b_[l][m] = magnetic ? 0.4 * u(rng) : 0.0;
        r_[l][m] = 3.0 * u(rng);
        q_[l][m] = Vec3(1.5 * u(rng), 1.5 * u(rng), 1.5 * u(rng));
      }
    }
    // Fields that depend only on the first `dim` coordinates.
    for (int m = 0; m < kModes; ++m) {
      for (int c = dim; c < 3; ++c) {
        k_[m][c] = 0.0;
        for (int l = 0; l < 3; ++l) q_[l][m][c] = 0.0;
      }
    }
  }

  double V(const Vec3& x) const override {
    double v = 0.0;
    for (int m = 0; m < kModes; ++m) v += a_[m] * std::sin(k_[m].dot(x) + p_[m]);
    return v;
  }
  Vec3 grad_V(const Vec3& x) const override {
    Vec3 g = Vec3::Zero();
    for (int m = 0; m < kModes; ++m) g += a_[m] * std::cos(k_[m].dot(x) + p_[m]) * k_[m];
    return g;
  }
  Mat3 hess_V(const Vec3& x) const override {
    Mat3 h = Mat3::Zero();
    for (int m = 0; m < kModes; ++m) h -= a_[m] * std::sin(k_[m].dot(x) + p_[m]) * k_[m] * k_[m].transpose();
    return h;
  }
  Vec3 A(const Vec3& x) const override {
    Vec3 out = Vec3::Zero();
    for (int l = 0; l < 3; ++l)
      for (int m = 0; m < kModes; ++m) out[l] += b_[l][m] * std::cos(q_[l][m].dot(x) + r_[l][m]);
    return out;
  }
  Mat3 jac_A(const Vec3& x) const override {
    Mat3 J = Mat3::Zero();
    for (int l = 0; l < 3; ++l)
      for (int m = 0; m < kModes; ++m) J.col(l) -= b_[l][m] * std::sin(q_[l][m].dot(x) + r_[l][m]) * q_[l][m];
    return J;
  }
  std::array<Mat3, 3> hess_A(const Vec3& x) const override {
    std::array<Mat3, 3> H{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
    for (int l = 0; l < 3; ++l)
      for (int m = 0; m < kModes; ++m)
        H[l] -= b_[l][m] * std::cos(q_[l][m].dot(x) + r_[l][m]) * q_[l][m] * q_[l][m].transpose();
    return H;
  }
  bool has_magnetic() const override { return magnetic_; }
  std::string name() const override { return "trig-test"; }

 private:
  static constexpr int kModes = 3;
  bool magnetic_;
  double a_[kModes], p_[kModes];
  Vec3 k_[kModes];
  double b_[3][kModes], r_[3][kModes];
  Vec3 q_[3][kModes];
};

inline Vec3 random_vec3(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

inline Spinor random_spinor(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Spinor s;
  for (int i = 0; i < 4; ++i) s[i] = Complex(n(rng), n(rng));
  return s;
}

/// Matrix exponential of a Hermitian-times-i generator via eigendecomposition:
/// exp(i c H) for Hermitian H.
inline Mat4c expm_i_hermitian(const Mat4c& H, double c) {
  Eigen::SelfAdjointEigenSolver<Mat4c> es(H);
  Eigen::Vector4cd phases;
  for (int i = 0; i < 4; ++i) phases[i] = std::exp(kI * c * es.eigenvalues()[i]);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace dgb::testing

#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "diracgb/types.hpp"

namespace dgb {

/// Static external fields V(x) (electric) and A(x) (magnetic) together with
/// their analytic first and second derivatives. Arguments are padded to R^3.
///
/// Conventions:
///   jac_A(x)(j, k)     = d A_k / d x_j
///   hess_A(x)[k](i, j) = d^2 A_k / (d x_i d x_j)
class PotentialModel {
 public:
  virtual ~PotentialModel() = default;

  virtual double V(const Vec3& x) const = 0;
  virtual Vec3 grad_V(const Vec3& x) const = 0;
  virtual Mat3 hess_V(const Vec3& x) const = 0;

  virtual Vec3 A(const Vec3& x) const = 0;
  virtual Mat3 jac_A(const Vec3& x) const = 0;
  virtual std::array<Mat3, 3> hess_A(const Vec3& x) const = 0;

  /// False only when A vanishes identically.
  virtual bool has_magnetic() const { return true; }
  virtual std::string name() const = 0;
};

using PotentialPtr = std::shared_ptr<const PotentialModel>;

class ZeroPotential final : public PotentialModel {
 public:
  double V(const Vec3&) const override { return 0.0; }
  Vec3 grad_V(const Vec3&) const override { return Vec3::Zero(); }
  Mat3 hess_V(const Vec3&) const override { return Mat3::Zero(); }
  Vec3 A(const Vec3&) const override { return Vec3::Zero(); }
  Mat3 jac_A(const Vec3&) const override { return Mat3::Zero(); }
  std::array<Mat3, 3> hess_A(const Vec3&) const override { return {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()}; }
  bool has_magnetic() const override { return false; }
  std::string name() const override { return "zero"; }
};

/// V(x) = (k/2) |x - c|^2, A = 0.
class HarmonicPotential final : public PotentialModel {
 public:
  explicit HarmonicPotential(double stiffness = 1.0, Vec3 center = Vec3::Zero())
      : k_(stiffness), c_(std::move(center)) {}

  double V(const Vec3& x) const override { return 0.5 * k_ * (x - c_).squaredNorm(); }
  Vec3 grad_V(const Vec3& x) const override { return k_ * (x - c_); }
  Mat3 hess_V(const Vec3&) const override { return k_ * Mat3::Identity(); }
  Vec3 A(const Vec3&) const override { return Vec3::Zero(); }
  Mat3 jac_A(const Vec3&) const override { return Mat3::Zero(); }
  std::array<Mat3, 3> hess_A(const Vec3&) const override { return {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()}; }
  bool has_magnetic() const override { return false; }
  std::string name() const override { return "harmonic"; }

 private:
  double k_;
  Vec3 c_;
};

/// Low-degree polynomial fields:
///   V(x)   = v0 + g.x + 1/2 x^T Q x + sum_i c_i x_i^3
///   A_k(x) = a_k + sum_j B(j,k) x_j + sum_j C(j,k) x_j^2
/// Q is symmetrised on construction.
struct PolynomialCoefficients {
  double v0 = 0.0;
  Vec3 g = Vec3::Zero();
  Mat3 Q = Mat3::Zero();
  Vec3 cubic = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Mat3 B = Mat3::Zero();
  Mat3 C = Mat3::Zero();
};

class PolynomialPotential final : public PotentialModel {
 public:
  explicit PolynomialPotential(PolynomialCoefficients c);

  double V(const Vec3& x) const override;
  Vec3 grad_V(const Vec3& x) const override;
  Mat3 hess_V(const Vec3& x) const override;
  Vec3 A(const Vec3& x) const override;
  Mat3 jac_A(const Vec3& x) const override;
  std::array<Mat3, 3> hess_A(const Vec3& x) const override;
  bool has_magnetic() const override { return magnetic_; }
  std::string name() const override { return "custom-polynomial"; }

  const PolynomialCoefficients& coefficients() const { return c_; }

 private:
  PolynomialCoefficients c_;
  bool magnetic_;
};

/// Builds a registered potential by name: "zero", "harmonic" (keys:
/// stiffness, center1..3) or "custom-polynomial" (keys: v0, g1..g3,
/// q11..q33, c1..c3, a1..a3, b11..b33, e11..e33 where b/e are the linear and
/// quadratic A coefficients B(j,k), C(j,k)). Unknown names or keys throw
/// ConfigError.
PotentialPtr make_potential(const std::string& name, const std::map<std::string, double>& params = {});

std::vector<std::string> registered_potentials();

}  // namespace dgb

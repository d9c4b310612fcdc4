#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dgb {

using Complex = std::complex<double>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4c = Eigen::Matrix4cd;
using Spinor = Eigen::Vector4cd;

// Vectors and matrices over the d <= 3 physical dimensions of a run.
using VecD = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using VecDc = Eigen::Matrix<Complex, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;
using MatDc = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

inline constexpr Complex kI{0.0, 1.0};

enum class Branch { Plus, Minus };

inline double sign(Branch b) { return b == Branch::Plus ? 1.0 : -1.0; }
inline const char* to_string(Branch b) { return b == Branch::Plus ? "+" : "-"; }

/// Embeds a d-vector into R^3 with zero padding.
inline Vec3 pad3(const VecD& v) {
  Vec3 out = Vec3::Zero();
  out.head(v.size()) = v;
  return out;
}

/// Point (x, xi) of phase space. Both coordinates are stored padded to R^3;
/// `dim` records how many leading coordinates are live.
struct PhasePoint {
  int dim = 3;
  Vec3 x = Vec3::Zero();
  Vec3 xi = Vec3::Zero();

  PhasePoint() = default;
  PhasePoint(const VecD& x_, const VecD& xi_) : dim(static_cast<int>(x_.size())), x(pad3(x_)), xi(pad3(xi_)) {
    if (x_.size() != xi_.size()) throw std::invalid_argument("PhasePoint: x and xi dimensions differ");
    if (dim < 1 || dim > 3) throw std::invalid_argument("PhasePoint: dimension must be 1, 2 or 3");
  }
};

/// Raised for malformed or inconsistent user configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical invariant (singular P, lost positivity of Im M,
/// ...) fails during a computation.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dgb

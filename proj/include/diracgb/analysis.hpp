#pragma once

#include <string>
#include <utility>
#include <vector>

#include "diracgb/field.hpp"
#include "diracgb/initial_data.hpp"

namespace dgb {

/// How the discrete l1 and l2 sums are scaled.
enum class NormScaling {
  MeshAverage,  // divide by the node count
  RawSum,       // plain sums
};

const char* to_string(NormScaling s);

struct ErrorReport {
  double epsilon = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  /// linf / max|b|; NaN when b vanishes identically.
  double linf_rel = 0.0;
  std::size_t nodes = 0;
  std::string grid;
  NormScaling scaling = NormScaling::MeshAverage;
};

/// Norms of a - b over the common grid, with |.| the Euclidean norm in C^4.
ErrorReport error_norms(const Field& a, const Field& b, NormScaling scaling = NormScaling::MeshAverage);

struct RateFit {
  std::vector<double> epsilon;
  std::vector<double> error;
  double slope = 0.0;
  double intercept = 0.0;
  /// Root-mean-square residual of the fit in log space.
  double residual = 0.0;
};

/// Least-squares slope of log(error) against log(epsilon).
RateFit convergence_rate(const std::vector<std::pair<double, double>>& pairs);

/// (e^{-|x|^2 / 4w^2} e^{-it/eps}, 0, 0, 0).
Spinor exact_example1(double t, const VecD& x, double eps, double width = kPacketWidth);

Field exact_example1_field(const Grid& grid, double t, double eps, double width = kPacketWidth);

}  // namespace dgb

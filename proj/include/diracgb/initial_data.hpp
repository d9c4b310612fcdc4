#pragma once

#include <functional>
#include <string>

#include "diracgb/types.hpp"

namespace dgb {

/// WKB initial data Psi(0, x) = u_I(x) exp(i S_I(x) / eps) with analytic
/// derivatives of the phase.
struct InitialData {
  std::string name;
  int dim = 3;
  std::function<double(const VecD&)> phase;
  std::function<VecD(const VecD&)> phase_grad;
  std::function<MatD(const VecD&)> phase_hess;
  std::function<Spinor(const VecD&)> amplitude;

  Spinor wave(const VecD& x, double eps) const { return amplitude(x) * std::exp(kI * phase(x) / eps); }
};

inline constexpr double kPacketWidth = 1.0 / 16.0;

/// Gaussian e^{-|x|^2 / 4w^2} (1,0,0,0)^T with zero phase.
InitialData example1_data(int dim = 3, double width = kPacketWidth);

/// Gaussian with the compressive phase S0 = (1 + cos 2 pi x1)(1 + cos 2 pi x2) / 40
/// and the x-dependent polarisation chi(x); dim is 2 or 3 (S0 ignores x3).
InitialData example2_data(int dim = 2, double width = kPacketWidth);

/// Gaussian centred at (0.1, -0.1, 0) with zero phase and chi = (1,0,0,0)^T.
InitialData example3_data(int dim = 3, double width = kPacketWidth);

struct GaussianPacket {
  int dim = 1;
  VecD center;
  double width = kPacketWidth;
  VecD momentum;             // linear phase k . x
  double curvature = 0.0;    // + curvature |x - center|^2 / 2
  double cosine_bump = 0.0;  // + cosine_bump * prod_k (1 + cos 2 pi x_k)
  Spinor chi = Spinor(1.0, 0.0, 0.0, 0.0);
};

/// General Gaussian packet; fields left empty default to zero vectors.
InitialData gaussian_packet(GaussianPacket p);

}  // namespace dgb

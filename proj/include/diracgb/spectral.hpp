#pragma once

#include "diracgb/field.hpp"
#include "diracgb/initial_data.hpp"
#include "diracgb/potential.hpp"

namespace dgb {

/// exp(-i dt (alpha.xi + beta) / eps) in closed form.
Mat4c kinetic_multiplier(const Vec3& xi, double dt, double eps);

/// exp(-i dt (V - alpha.A) / eps) in closed form.
Mat4c potential_multiplier(double V, const Vec3& A, double dt, double eps);

/// Periodic grid with `n` points per axis on [lo, hi)^d.
Grid periodic_grid(int d, double lo, double hi, std::size_t n);

/// Samples u_I exp(i S_I / eps) on the grid nodes.
Field sample_initial(const InitialData& data, const Grid& grid, double eps);

/// Integral of |Psi|^2 over the grid (cell volume times the node sum).
double mass(const Field& f);

/// Time-splitting spectral solver on a periodic box. Every axis of the grid
/// must be periodic with an even count of at least 4.
class SpectralSolver {
 public:
  SpectralSolver(const Grid& grid, double eps);

  const Grid& grid() const { return grid_; }
  double epsilon() const { return eps_; }

  /// Exact propagation of -i eps alpha.grad + beta over dt in Fourier space.
  void kinetic_step(Field& f, double dt) const;

  /// Pointwise propagation of V - alpha.A over dt.
  void potential_step(Field& f, double dt, const PotentialModel& pot) const;

  /// Strang splitting (half potential, kinetic, half potential) from f.t to
  /// t_final; the last step is shortened to land on t_final.
  Field strang_solve(Field f, double t_final, double dt, const PotentialModel& pot) const;

  /// Bytes needed for a field on `grid` plus solver workspace.
  static double memory_estimate(const Grid& grid);

 private:
  void check(const Field& f) const;
  void fft(Field& f, int sign) const;

  Grid grid_;
  double eps_;
};

}  // namespace dgb

#include "diracgb/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "diracgb/dirac.hpp"
#include "parallel.hpp"

namespace dgb {

Mat4c kinetic_multiplier(const Vec3& xi, double dt, double eps) {
  const double lam = std::sqrt(xi.squaredNorm() + 1.0);
  const double ph = lam * dt / eps;
  const Mat4c K = alpha_dot(xi) + dirac_matrices().beta;
  return std::cos(ph) * Mat4c::Identity() - kI * (std::sin(ph) / lam) * K;
}

Mat4c potential_multiplier(double V, const Vec3& A, double dt, double eps) {
  const Complex phase = std::exp(-kI * V * dt / eps);
  const double a = A.norm();
  if (a < 1e-14) return phase * Mat4c::Identity();
  const double ph = a * dt / eps;
  return phase * (std::cos(ph) * Mat4c::Identity() + kI * std::sin(ph) * alpha_dot(Vec3(A / a)));
}

Grid periodic_grid(int d, double lo, double hi, std::size_t n) {
  return Grid(std::vector<Axis>(static_cast<std::size_t>(d), Axis{lo, hi, n, true}));
}

Field sample_initial(const InitialData& data, const Grid& grid, double eps) {
  if (grid.dim() != data.dim) throw std::invalid_argument("sample_initial: grid and data dimensions differ");
  Field f(grid, 0.0, eps);
  const auto n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    f.values[u] = data.wave(grid.point(u), eps);
  }
  return f;
}

double mass(const Field& f) {
  const double sum = deterministic_sum<double>(f.values.size(), [&](std::size_t i) { return f.values[i].squaredNorm(); });
  return sum * f.grid.cell_volume();
}

SpectralSolver::SpectralSolver(const Grid& grid, double eps) : grid_(grid), eps_(eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("spectral solver: epsilon must be positive");
  if (grid.dim() > 3) throw std::invalid_argument("spectral solver: at most 3 dimensions");
  for (const auto& a : grid.axes())
    if (!a.periodic || a.count < 4 || a.count % 2 != 0)
      throw std::invalid_argument("spectral solver: axes must be periodic with an even count >= 4");
}

double SpectralSolver::memory_estimate(const Grid& grid) {
  // Field values plus a copy held by the caller and FFTW scratch.
  return 3.0 * static_cast<double>(grid.size()) * static_cast<double>(sizeof(Spinor));
}

void SpectralSolver::check(const Field& f) const {
  if (!f.grid.same_as(grid_)) throw std::invalid_argument("spectral solver: field grid differs from solver grid");
}

void SpectralSolver::fft(Field& f, int sign) const {
  const int d = grid_.dim();
  int n[3];
  for (int k = 0; k < d; ++k) n[k] = static_cast<int>(grid_.axis(k).count);
  auto* data = reinterpret_cast<fftw_complex*>(f.values.data());
  // The four spinor components are interleaved: stride 4, distance 1.
  fftw_plan plan = fftw_plan_many_dft(d, n, 4, data, nullptr, 4, 1, data, nullptr, 4, 1, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan == nullptr) throw std::runtime_error("FFTW planning failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

void SpectralSolver::kinetic_step(Field& f, double dt) const {
  check(f);
  if (dt == 0.0) return;
  fft(f, FFTW_FORWARD);
  const int d = grid_.dim();
  const auto total = static_cast<long>(grid_.size());
  const double scale = 1.0 / static_cast<double>(total);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < total; ++i) {
    auto rem = static_cast<std::size_t>(i);
    Vec3 xi = Vec3::Zero();
    for (int k = 0; k < d; ++k) {
      const Axis& a = grid_.axis(k);
      const std::size_t j = rem / grid_.stride(k);
      rem %= grid_.stride(k);
      const auto m = static_cast<long>(j) - (j >= a.count / 2 ? static_cast<long>(a.count) : 0L);
      xi[k] = eps_ * 2.0 * std::numbers::pi * static_cast<double>(m) / (a.max - a.min);
    }
    auto& v = f.values[static_cast<std::size_t>(i)];
    v = scale * (kinetic_multiplier(xi, dt, eps_) * v);
  }
  fft(f, FFTW_BACKWARD);
}

void SpectralSolver::potential_step(Field& f, double dt, const PotentialModel& pot) const {
  check(f);
  if (dt == 0.0) return;
  const auto total = static_cast<long>(grid_.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < total; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const Vec3 x = pad3(grid_.point(u));
    f.values[u] = potential_multiplier(pot.V(x), pot.A(x), dt, eps_) * f.values[u];
  }
}

Field SpectralSolver::strang_solve(Field f, double t_final, double dt, const PotentialModel& pot) const {
  check(f);
  if (!(dt > 0.0)) throw std::invalid_argument("strang_solve: dt must be positive");
  if (t_final < f.t) throw std::invalid_argument("strang_solve: target time precedes the field time");
  const double span = t_final - f.t;
  if (span == 0.0) return f;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
  const double t0 = f.t;
  const bool free = dynamic_cast<const ZeroPotential*>(&pot) != nullptr;
  for (std::size_t k = 0; k < steps; ++k) {
    const double ta = t0 + static_cast<double>(k) * dt;
    const double tb = (k + 1 == steps) ? t_final : t0 + static_cast<double>(k + 1) * dt;
    const double h = tb - ta;
    if (!free) potential_step(f, 0.5 * h, pot);
    kinetic_step(f, h);
    if (!free) potential_step(f, 0.5 * h, pot);
  }
  f.t = t_final;
  return f;
}

}  // namespace dgb

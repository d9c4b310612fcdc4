#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "diracgb/dirac.hpp"
#include "diracgb/spectral.hpp"
#include "test_support.hpp"

using namespace dgb;

namespace {

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, (a.values[i] - b.values[i]).norm());
  return m;
}

}  // namespace

TEST_CASE("kinetic multiplier") {
  const double eps = 1.0 / 64;
  const Mat4c k0 = kinetic_multiplier(Vec3::Zero(), 0.1, eps);
  const Spinor e1(1, 0, 0, 0);
  CHECK((k0 * e1 - std::exp(-kI * 0.1 / eps) * e1).norm() < 1e-14);
  CHECK((kinetic_multiplier(Vec3(0.3, -1, 2), 0.0, eps) - Mat4c::Identity()).norm() == 0.0);

  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Vec3 xi = testing::random_vec3(rng, 3.0);
    const double dt = 0.05 * (i % 7 + 1);
    const Mat4c K = alpha_dot(xi) + dirac_matrices().beta;
    const Mat4c dense = testing::expm_i_hermitian(K, -dt / eps);
    const Mat4c closed = kinetic_multiplier(xi, dt, eps);
    CHECK((closed - dense).norm() < 1e-12);
    CHECK((closed * closed.adjoint() - Mat4c::Identity()).norm() < 1e-13);
  }
}

TEST_CASE("potential multiplier") {
  const double eps = 1.0 / 128;
  const Mat4c p = potential_multiplier(0.7, Vec3::Zero(), 0.2, eps);
  CHECK((p - std::exp(-kI * 0.7 * 0.2 / eps) * Mat4c::Identity()).norm() < 1e-13);
  CHECK((potential_multiplier(0.0, Vec3::Zero(), 0.2, eps) - Mat4c::Identity()).norm() == 0.0);
  CHECK((potential_multiplier(0.0, Vec3(1e-16, 0, 0), 0.2, eps) - Mat4c::Identity()).norm() == 0.0);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const Vec3 A = i % 2 == 0 ? Vec3(testing::random_vec3(rng)[0], 0, 0) : testing::random_vec3(rng);
    const double V = testing::random_vec3(rng)[1];
    const double dt = 0.01 * (i % 5 + 1);
    const Mat4c H = alpha_dot(A) - V * Mat4c::Identity();
    const Mat4c dense = testing::expm_i_hermitian(H, dt / eps);
    CHECK((potential_multiplier(V, A, dt, eps) - dense).norm() < 1e-12);
  }
}

TEST_CASE("solver rejects unsuitable grids") {
  CHECK_THROWS_AS(SpectralSolver(box_grid(1, -1, 1, 16), 0.01), std::invalid_argument);
  CHECK_THROWS_AS(SpectralSolver(periodic_grid(1, -1, 1, 15), 0.01), std::invalid_argument);
  CHECK_THROWS_AS(SpectralSolver(periodic_grid(1, -1, 1, 2), 0.01), std::invalid_argument);
  CHECK_THROWS_AS(SpectralSolver(periodic_grid(1, -1, 1, 16), 0.0), std::invalid_argument);
  const SpectralSolver s(periodic_grid(1, -1, 1, 16), 0.01);
  Field wrong(periodic_grid(1, -1, 1, 32), 0.0, 0.01);
  CHECK_THROWS_AS(s.kinetic_step(wrong, 0.1), std::invalid_argument);
}

TEST_CASE("plane waves are propagated exactly") {
  // Psi = w e^{i k.x} with w a +lambda eigenvector of alpha.xi + beta evolves by e^{-i lambda t / eps}.
  const double eps = 1.0 / 32;
  const Grid g = periodic_grid(2, -0.5, 0.5, 32);
  const SpectralSolver solver(g, eps);
  const Eigen::Vector2d k(2.0 * std::numbers::pi * 3, -2.0 * std::numbers::pi * 5);
  const Vec3 xi(eps * k[0], eps * k[1], 0.0);
  const double lam = std::sqrt(xi.squaredNorm() + 1.0);
  const Spinor w = (projector(Branch::Plus, PhasePoint(VecD(xi), VecD(xi)), ZeroPotential()) * Spinor(1, 0.3, 0, 0));
  Field f(g, 0.0, eps);
  for (std::size_t n = 0; n < g.size(); ++n) f.values[n] = std::exp(kI * k.dot(g.point(n))) * w;
  const Field out = solver.strang_solve(f, 0.37, 0.37, ZeroPotential());
  double err = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n)
    err = std::max(err, (out.values[n] - std::exp(-kI * lam * 0.37 / eps) * f.values[n]).norm());
  CHECK(err < 1e-12);
  CHECK(out.t == 0.37);
}

TEST_CASE("mass is conserved") {
  const double eps = 1.0 / 64;
  const Grid g = periodic_grid(2, -1, 1, 64);
  const SpectralSolver solver(g, eps);
  GaussianPacket p;
  p.dim = 2;
  p.center = VecD(Eigen::Vector2d(0.1, -0.2));
  p.momentum = VecD(Eigen::Vector2d(0.3, 0.5));
  p.width = 0.1;
  p.chi = Spinor(1, kI, 0.2, 0) / 1.2;
  const Field f0 = sample_initial(gaussian_packet(p), g, eps);
  const double m0 = mass(f0);
  PolynomialCoefficients c;
  c.Q = Mat3::Identity();
  c.a = Vec3(0.1, 0, 0.2);
  c.B << 0.0, 0.5, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0;
  const PolynomialPotential pot(c);
  const Field f1 = solver.strang_solve(f0, 0.5, 0.01, pot);
  CHECK(std::abs(mass(f1) - m0) < 1e-12 * m0);
  const Field f2 = solver.strang_solve(f0, 0.5, 0.01, HarmonicPotential());
  CHECK(std::abs(mass(f2) - m0) < 1e-12 * m0);
}

TEST_CASE("free evolution does not depend on the step") {
  const double eps = 1.0 / 64;
  const Grid g = periodic_grid(2, -0.5, 0.5, 128);
  const SpectralSolver solver(g, eps);
  const Field f0 = sample_initial(example2_data(2), g, eps);
  const Field one = solver.strang_solve(f0, 0.3, 0.3, ZeroPotential());
  const Field many = solver.strang_solve(f0, 0.3, 0.003, ZeroPotential());
  CHECK(max_diff(one, many) < 1e-10);
  CHECK(one.max_abs() > 0.1);
  // Psi_2 = Psi_3 = 0 is preserved without being imposed.
  double mid = 0.0;
  for (const auto& v : one.values) mid = std::max(mid, std::abs(v[1]) + std::abs(v[2]));
  CHECK(mid < 1e-12);
  Field same = f0;
  solver.kinetic_step(same, 0.0);
  CHECK(max_diff(same, f0) == 0.0);
}

TEST_CASE("Strang splitting is second order in the step") {
  const double eps = 1.0 / 32;
  const Grid g = periodic_grid(1, -1.5, 1.5, 256);
  const SpectralSolver solver(g, eps);
  GaussianPacket p;
  p.dim = 1;
  p.center = VecD::Constant(1, 0.2);
  p.width = 0.1;
  const Field f0 = sample_initial(gaussian_packet(p), g, eps);
  const HarmonicPotential pot;
  const Field ref = solver.strang_solve(f0, 0.4, 0.4 / 3200, pot);
  const double e1 = max_diff(solver.strang_solve(f0, 0.4, 0.4 / 50, pot), ref);
  const double e2 = max_diff(solver.strang_solve(f0, 0.4, 0.4 / 100, pot), ref);
  const double order = std::log2(e1 / e2);
  MESSAGE("splitting errors " << e1 << " " << e2 << " order " << order);
  CHECK(order > 1.8);
  CHECK(order < 2.2);
}

TEST_CASE("grid refinement converges spectrally") {
  const double eps = 1.0 / 64;
  const InitialData data = example1_data(1);
  const Grid coarse = periodic_grid(1, -1, 1, 512);
  const Grid fine = periodic_grid(1, -1, 1, 1024);
  const Field a = SpectralSolver(coarse, eps).strang_solve(sample_initial(data, coarse, eps), 0.5, 0.5, ZeroPotential());
  const Field b = SpectralSolver(fine, eps).strang_solve(sample_initial(data, fine, eps), 0.5, 0.5, ZeroPotential());
  double d = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) d = std::max(d, (a.values[i] - b.values[2 * i]).norm());
  CHECK(d < 1e-10);
}

TEST_CASE("mass of sampled data") {
  const double eps = 1.0 / 256;
  const Grid g = periodic_grid(2, -0.5, 0.5, 128);
  const double m = mass(sample_initial(example1_data(2), g, eps));
  // Integral of e^{-|x|^2 / 2w^2} over the plane.
  const double w = kPacketWidth;
  CHECK(m == doctest::Approx(2.0 * std::numbers::pi * w * w).epsilon(1e-6));
}

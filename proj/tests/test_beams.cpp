#include <doctest.h>

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "diracgb/beams.hpp"
#include "diracgb/dirac.hpp"
#include "diracgb/threads.hpp"
#include "test_support.hpp"

using namespace dgb;
using dgb::testing::TrigPotential;

namespace {

BeamState free_beam(int d, const VecD& xi, Branch b = Branch::Plus) {
  BeamState s;
  s.y = VecD::Zero(d);
  s.xi = xi;
  s.P = MatDc::Identity(d, d);
  s.R = kI * MatDc::Identity(d, d);
  s.u0 = Spinor::Zero();
  s.u0[b == Branch::Plus ? 0 : 2] = 1.0;
  s.branch = b;
  s.y0 = s.y;
  s.weight = 1.0;
  return s;
}

BeamSet single(const BeamState& s, double eps = 0.01) {
  BeamSet bs;
  bs.beams = {s};
  bs.epsilon = eps;
  bs.dim = s.dim();
  return bs;
}

// Independent ray + Riccati integrator: state is (y, xi, Re M, Im M) in 3D.
struct RiccatiSystem {
  const PotentialModel* pot;
  Branch b;
  using State = std::vector<double>;

  void operator()(const State& z, State& dz, double) const {
    Vec3 y(z[0], z[1], z[2]), xi(z[3], z[4], z[5]);
    Eigen::Matrix3cd M;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) M(i, j) = Complex(z[6 + 3 * i + j], z[15 + 3 * i + j]);
    const auto hd = h_derivatives3(b, y, xi, *pot);
    const Eigen::Matrix3cd Hyy = hd.hess_yy.cast<Complex>();
    const Eigen::Matrix3cd Hyk = hd.hess_yxi.cast<Complex>();
    const Eigen::Matrix3cd Hkk = hd.hess_xixi.cast<Complex>();
    const Eigen::Matrix3cd dM = -Hyy - Hyk * M - M * Hyk.transpose() - M * Hkk * M;
    for (int i = 0; i < 3; ++i) {
      dz[static_cast<std::size_t>(i)] = hd.grad_xi[i];
      dz[static_cast<std::size_t>(3 + i)] = -hd.grad_y[i];
      for (int j = 0; j < 3; ++j) {
        dz[static_cast<std::size_t>(6 + 3 * i + j)] = dM(i, j).real();
        dz[static_cast<std::size_t>(15 + 3 * i + j)] = dM(i, j).imag();
      }
    }
  }
};

}  // namespace

TEST_CASE("init_beams from example 1 data") {
  ZeroPotential zero;
  const auto data = example1_data(1);
  const Grid g = beam_mesh(1, -0.5, 0.5, 0.05);
  const BeamSet bs = init_beams(data, g, 0.01, zero);
  CHECK(bs.dim == 1);
  CHECK(bs.t == 0.0);
  CHECK(bs.count(Branch::Minus) == 0);  // Pi^- (1,0,0,0) = 0 at xi = 0
  CHECK(bs.count(Branch::Plus) == g.size());
  bool found = false;
  for (const auto& s : bs.beams) {
    CHECK(s.weight == doctest::Approx(g.cell_volume()));
    if (std::abs(s.y0[0]) < 1e-14) {
      found = true;
      CHECK(s.xi[0] == 0.0);
      CHECK(s.S == 0.0);
      CHECK(std::abs(hessian_of(s)(0, 0) - kI) < 1e-15);
      CHECK((s.u0 - Spinor(1, 0, 0, 0)).norm() < 1e-15);
    }
  }
  CHECK(found);
}

TEST_CASE("init_beams with quadratic phase") {
  ZeroPotential zero;
  GaussianPacket p;
  p.dim = 3;
  p.center = VecD::Zero(3);
  p.curvature = 1.0;
  p.width = 1.0;
  const auto data = gaussian_packet(p);
  const Grid g(std::vector<Axis>{{1.0, 1.0, 1, false}, {0.0, 0.0, 1, false}, {0.0, 0.0, 1, false}});
  const BeamSet bs = init_beams(data, g, 0.01, zero);
  REQUIRE(bs.beams.size() == 2);
  for (const auto& s : bs.beams) {
    CHECK((s.xi - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK((hessian_of(s) - (1.0 + kI) * MatDc::Identity(3, 3)).norm() < 1e-15);
    CHECK((projector(s.branch == Branch::Plus ? Branch::Minus : Branch::Plus, PhasePoint(s.y, s.xi), zero) * s.u0)
              .norm() < 1e-14);
  }
}

TEST_CASE("init_beams from example 2 data at the origin") {
  ZeroPotential zero;
  const Grid g = beam_mesh(2, -0.2, 0.2, 0.1);
  const BeamSet bs = init_beams(example2_data(2), g, 0.01, zero);
  bool found = false;
  for (const auto& s : bs.beams) {
    if (s.y0.norm() < 1e-14 && s.branch == Branch::Plus) {
      found = true;
      CHECK(s.xi.norm() < 1e-15);
      CHECK((s.u0 - Spinor(1, 0, 0, 0)).norm() < 1e-14);
    }
  }
  CHECK(found);
}

TEST_CASE("init_beams rejects bad input") {
  ZeroPotential zero;
  const Grid g = beam_mesh(1, -0.5, 0.5, 0.1);
  CHECK_THROWS_AS(init_beams(example1_data(1), g, 0.0, zero), std::invalid_argument);
  CHECK_THROWS_AS(init_beams(example1_data(1), g, -1.0, zero), std::invalid_argument);
  CHECK_THROWS_AS(init_beams(example1_data(1), Grid(), 0.01, zero), std::invalid_argument);
}

TEST_CASE("beam_rhs examples") {
  ZeroPotential zero;
  const auto r0 = beam_rhs(free_beam(3, VecD::Zero(3)), zero);
  CHECK(r0.dy.norm() == 0.0);
  CHECK(r0.dxi.norm() == 0.0);
  CHECK(r0.dS == -1.0);
  CHECK((r0.dP - kI * MatDc::Identity(3, 3)).norm() < 1e-15);
  CHECK(r0.dR.norm() == 0.0);
  // -1/2 tr(h_xixi M) = -3i/2
  CHECK((r0.du0 - (-1.5 * kI) * Spinor(1, 0, 0, 0)).norm() < 1e-15);

  const auto r1 = beam_rhs(free_beam(3, Vec3(1, 0, 0)), zero);
  CHECK(r1.dy[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(r1.dS == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));

  HarmonicPotential harmonic;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    BeamState s = free_beam(3, dgb::testing::random_vec3(rng));
    s.y = dgb::testing::random_vec3(rng);
    CHECK((beam_rhs(s, harmonic).dxi + s.y).norm() < 1e-15);
  }
}

TEST_CASE("free particle evolution") {
  ZeroPotential zero;
  const BeamSet out = evolve(single(free_beam(3, VecD::Zero(3))), 0.5, 0.01, zero);
  const auto& s = out.beams[0];
  CHECK(out.t == 0.5);
  CHECK(s.y.norm() == 0.0);
  CHECK(s.S == doctest::Approx(-0.5).epsilon(1e-14));
  // u0 stays parallel to (1,0,0,0) and follows det(P)^{-1/2} = (1 + i t)^{-3/2}.
  CHECK(std::abs(s.u0[1]) + std::abs(s.u0[2]) + std::abs(s.u0[3]) == 0.0);
  CHECK(std::abs(s.u0[0] - std::pow(1.0 + 0.5 * kI, -1.5)) < 1e-9);

  // Partial divergence leaves the amplitude frozen for a free particle.
  BeamOptions partial;
  partial.divergence = DivergenceMode::Partial;
  const auto sp = evolve(single(free_beam(3, VecD::Zero(3))), 0.5, 0.1, zero, partial).beams[0];
  CHECK((sp.u0 - Spinor(1, 0, 0, 0)).norm() < 1e-15);

  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const Vec3 xi0 = dgb::testing::random_vec3(rng, 2.0);
    const Vec3 y0 = dgb::testing::random_vec3(rng);
    for (Branch b : {Branch::Plus, Branch::Minus}) {
      BeamState s0 = free_beam(3, xi0, b);
      s0.y = y0;
      s0.u0 = projector(b, PhasePoint(VecD(y0), VecD(xi0)), zero) * dgb::testing::random_spinor(rng);
      const auto s1 = evolve(single(s0), 1.0, 0.05, zero).beams[0];
      const double lam = std::sqrt(1.0 + xi0.squaredNorm());
      CHECK((s1.y - (y0 + sign(b) * xi0 / lam)).norm() < 1e-12);
      CHECK((s1.xi - xi0).norm() < 1e-12);
    }
  }
}

TEST_CASE("one-dimensional closed-form Hessian") {
  ZeroPotential zero;
  const auto s = evolve(single(free_beam(1, VecD::Zero(1))), 1.0, 0.01, zero).beams[0];
  CHECK(std::abs(s.P(0, 0) - (1.0 + kI)) < 1e-12);
  CHECK(std::abs(s.R(0, 0) - kI) < 1e-15);
  CHECK(std::abs(hessian_of(s)(0, 0) - 0.5 * (1.0 + kI)) < 1e-12);
  for (double t : {0.25, 0.5, 0.75}) {
    const auto st = evolve(single(free_beam(1, VecD::Zero(1))), t, 0.01, zero).beams[0];
    CHECK(std::abs(hessian_of(st)(0, 0) - (t + kI) / (1.0 + t * t)) < 1e-12);
  }
}

TEST_CASE("hessian_of") {
  BeamState s = free_beam(2, VecD::Zero(2));
  CHECK((hessian_of(s) - kI * MatDc::Identity(2, 2)).norm() == 0.0);
  s.P = (1.0 + kI) * MatDc::Identity(2, 2);
  CHECK((hessian_of(s) - 0.5 * (1.0 + kI) * MatDc::Identity(2, 2)).norm() < 1e-15);
  s.P = MatDc::Zero(2, 2);
  CHECK_THROWS_AS(hessian_of(s), InvariantViolation);
  s.P = MatDc::Identity(2, 2);
  s.R(0, 1) = 1.0;
  CHECK_THROWS_AS(hessian_of(s), InvariantViolation);
}

TEST_CASE("P-R propagation agrees with an independent Riccati integration") {
  namespace ode = boost::numeric::odeint;
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    TrigPotential pot(rng, trial % 2 == 0);
    const Branch b = trial < 3 ? Branch::Plus : Branch::Minus;
    BeamState s = free_beam(3, dgb::testing::random_vec3(rng), b);
    s.y = dgb::testing::random_vec3(rng, 0.5);
    s.u0 = projector(b, PhasePoint(s.y, s.xi), pot) * dgb::testing::random_spinor(rng);
    const MatDc M0 = kI * MatDc::Identity(3, 3);
    const MatDc PtR0 = s.P.transpose() * s.R - s.R.transpose() * s.P;

    RiccatiSystem sys{&pot, b};
    RiccatiSystem::State z(24, 0.0);
    for (int i = 0; i < 3; ++i) {
      z[static_cast<std::size_t>(i)] = s.y[i];
      z[static_cast<std::size_t>(3 + i)] = s.xi[i];
      for (int j = 0; j < 3; ++j) z[static_cast<std::size_t>(15 + 3 * i + j)] = M0(i, j).imag();
    }
    BeamSet bs = single(s);
    for (int k = 1; k <= 4; ++k) {
      const double t = 0.25 * k;
      ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<RiccatiSystem::State>>(1e-13, 1e-13), sys, z,
                              t - 0.25, t, 1e-3);
      bs = evolve(bs, t, 0.005, pot);
      const auto& st = bs.beams[0];
      const MatDc M = hessian_of(st);
      for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(st.y[i] - z[static_cast<std::size_t>(i)]) < 1e-9);
        CHECK(std::abs(st.xi[i] - z[static_cast<std::size_t>(3 + i)]) < 1e-9);
        for (int j = 0; j < 3; ++j) {
          const Complex ref(z[static_cast<std::size_t>(6 + 3 * i + j)], z[static_cast<std::size_t>(15 + 3 * i + j)]);
          CHECK(std::abs(M(i, j) - ref) < 1e-8);
        }
      }
      CHECK((st.P.transpose() * st.R - st.R.transpose() * st.P - PtR0).norm() < 1e-8);
      CHECK(min_imag_hessian_eig(M) > 0.0);
      const Branch other = b == Branch::Plus ? Branch::Minus : Branch::Plus;
      CHECK((projector(other, PhasePoint(st.y, st.xi), pot) * st.u0).norm() <= 1e-6 * st.u0.norm());
    }
  }
}

TEST_CASE("energy drift is fourth order in the step") {
  HarmonicPotential harmonic;
  std::mt19937_64 rng(12);
  TrigPotential trig(rng);
  for (const PotentialModel* pot : {static_cast<const PotentialModel*>(&harmonic), static_cast<const PotentialModel*>(&trig)}) {
    BeamState s = free_beam(3, Vec3(0.8, -0.3, 0.5));
    s.y = VecD(Vec3(0.7, 0.2, -0.4));
    s.u0 = projector(Branch::Plus, PhasePoint(s.y, s.xi), *pot) * Spinor(1, 0, 0, 0);
    const double h0 = eigenvalue_h(Branch::Plus, PhasePoint(s.y, s.xi), *pot);
    std::array<double, 2> drift{};
    for (int k = 0; k < 2; ++k) {
      const double dt = 0.05 / (1 << k);
      const auto st = evolve(single(s), 2.0, dt, *pot).beams[0];
      drift[static_cast<std::size_t>(k)] = std::abs(eigenvalue_h(Branch::Plus, PhasePoint(st.y, st.xi), *pot) - h0);
    }
    MESSAGE("energy drift " << drift[0] << " -> " << drift[1]);
    CHECK(drift[0] > 0.0);
    CHECK(drift[0] / drift[1] > 10.0);
    CHECK(drift[0] / drift[1] < 64.0);
  }
}

TEST_CASE("invariant violations are reported with the beam index") {
  ZeroPotential zero;
  BeamSet bs;
  bs.epsilon = 0.01;
  bs.dim = 2;
  for (int i = 0; i < 200; ++i) bs.beams.push_back(free_beam(2, VecD::Zero(2)));
  bs.beams[137].R = -kI * MatDc::Identity(2, 2);  // Im M negative definite
  bs.beams[150].R = -kI * MatDc::Identity(2, 2);
  for (int threads : {1, 4}) {
    set_threads(threads);
    try {
      evolve(bs, 0.1, 0.05, zero);
      FAIL("expected an invariant violation");
    } catch (const InvariantViolation& e) {
      const std::string msg = e.what();
      CHECK(msg.find("beam 137") != std::string::npos);
      CHECK(msg.find("t = 0.05") != std::string::npos);
    }
  }
  set_threads(0);

  BeamState s = free_beam(2, VecD::Zero(2));
  s.P = MatDc::Zero(2, 2);
  CHECK_THROWS_AS(check_beam(s, 0, 0.0, zero), InvariantViolation);
  s = free_beam(2, VecD::Zero(2));
  s.u0 = Spinor(0, 0, 1, 0);  // minus-branch spinor on a plus beam
  CHECK_THROWS_AS(check_beam(s, 0, 0.0, zero), InvariantViolation);
  s.u0[0] = std::nan("");
  CHECK_THROWS_AS(check_beam(s, 0, 0.0, zero), InvariantViolation);
  CHECK_THROWS_AS(evolve(bs, 0.1, 0.0, zero), std::invalid_argument);
}

TEST_CASE("evolve lands on the final time and is thread-count independent") {
  std::mt19937_64 rng(9);
  TrigPotential pot(rng, true, 2);
  const Grid g = beam_mesh(2, -0.3, 0.3, 0.1);
  const BeamSet bs = init_beams(example2_data(2), g, 0.01, pot);
  set_threads(1);
  const BeamSet a = evolve(bs, 0.33, 0.02, pot);
  set_threads(4);
  const BeamSet b = evolve(bs, 0.33, 0.02, pot);
  set_threads(0);
  CHECK(a.t == 0.33);
  REQUIRE(a.beams.size() == b.beams.size());
  for (std::size_t i = 0; i < a.beams.size(); ++i) {
    CHECK(a.beams[i].y == b.beams[i].y);
    CHECK(a.beams[i].u0 == b.beams[i].u0);
    CHECK(a.beams[i].P == b.beams[i].P);
  }
}

TEST_CASE("beam_mesh") {
  const Grid g = beam_mesh(2, -0.5, 0.5, 0.1);
  CHECK(g.axis(0).count == 11);
  CHECK(g.axis(0).spacing() == doctest::Approx(0.1));
  const Grid h = beam_mesh(1, -0.5, 0.5, 0.3);
  CHECK(h.axis(0).count == 3);
  CHECK(h.axis(0).min == doctest::Approx(-0.3));
  CHECK_THROWS_AS(beam_mesh(1, 0.0, 1.0, 2.0), std::invalid_argument);
}

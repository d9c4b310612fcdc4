#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "diracgb/summation.hpp"
#include "diracgb/threads.hpp"
#include "test_support.hpp"

using namespace dgb;

namespace {

BeamState gauss_beam(const VecD& y, const VecD& xi, const MatDc& M, const Spinor& u0) {
  const int d = static_cast<int>(y.size());
  BeamState s;
  s.y = y;
  s.xi = xi;
  s.P = MatDc::Identity(d, d);
  s.R = M;
  s.u0 = u0;
  s.y0 = y;
  s.weight = 1.0;
  return s;
}

// Random beams with symmetric M and Im M positive definite.
BeamSet random_beams(std::mt19937_64& rng, int d, int n, double eps) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BeamSet bs;
  bs.dim = d;
  bs.epsilon = eps;
  for (int j = 0; j < n; ++j) {
    MatD re(d, d), a(d, d);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        re(i, k) = u(rng);
        a(i, k) = 0.5 * u(rng);
      }
    re = 0.5 * (re + re.transpose()).eval();
    const MatD im = a * a.transpose() + 0.5 * MatD::Identity(d, d);
    VecD y(d), xi(d);
    for (int i = 0; i < d; ++i) {
      y[i] = 0.6 * u(rng);
      xi[i] = u(rng);
    }
    BeamState s = gauss_beam(y, xi, re.cast<Complex>() + kI * im.cast<Complex>(), testing::random_spinor(rng));
    s.S = u(rng);
    s.weight = 0.01 * (1.5 + u(rng));
    s.branch = j % 3 == 0 ? Branch::Minus : Branch::Plus;
    bs.beams.push_back(s);
  }
  return bs;
}

}  // namespace

TEST_CASE("evaluate_beam examples") {
  const double eps = 0.01;
  const BeamState s = gauss_beam(VecD::Zero(3), VecD::Zero(3), kI * MatDc::Identity(3, 3), Spinor(1, 0, 0, 0));
  CHECK((evaluate_beam(s, VecD::Zero(3), eps) - Spinor(1, 0, 0, 0)).norm() == 0.0);
  const VecD x = VecD(Vec3(1, 1, 0).normalized()) * std::sqrt(2.0 * eps);
  CHECK((evaluate_beam(s, x, eps) - std::exp(-1.0) * Spinor(1, 0, 0, 0)).norm() < 1e-15);

  BeamState moving = s;
  moving.xi = VecD(Vec3(1, 0, 0));
  for (double x1 : {0.0, 0.03, -0.07}) {
    const VecD p = VecD(Vec3(x1, 0.02, 0));
    const Spinor expect = std::exp(kI * x1 / eps) * evaluate_beam(s, p, eps);
    CHECK((evaluate_beam(moving, p, eps) - expect).norm() < 1e-14);
  }

  std::mt19937_64 rng(1);
  const BeamSet bs = random_beams(rng, 3, 50, eps);
  for (const auto& b : bs.beams)
    for (int k = 0; k < 10; ++k) {
      const VecD p = VecD(testing::random_vec3(rng));
      CHECK(evaluate_beam(b, p, eps).norm() <= b.u0.norm() * (1.0 + 1e-14));
    }
}

TEST_CASE("truncation function") {
  const double theta = 0.3;
  CHECK(truncation_r(0.0, theta) == 1.0);
  CHECK(truncation_r(theta, theta) == 1.0);
  CHECK(truncation_r(2.0 * theta, theta) == 0.0);
  CHECK(truncation_r(3.0 * theta, theta) == 0.0);
  const double mid = truncation_r(1.5 * theta, theta);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  CHECK(truncation_r(VecD(Vec3(0.4, 0.3, 0.0)), 0.5) == doctest::Approx(truncation_r(0.5, 0.5)));
  CHECK_THROWS_AS(truncation_r(0.1, 0.0), std::invalid_argument);

  // Monotone, with vanishing one-sided slopes at both junctions.
  double prev = 1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = truncation_r(theta + theta * i / 1000.0, theta);
    CHECK(v <= prev);
    prev = v;
  }
  const double h = 1e-6;
  for (double r : {theta, 2.0 * theta}) {
    CHECK(std::abs(truncation_r(r + h, theta) - truncation_r(r, theta)) / h < 1e-4);
    CHECK(std::abs(truncation_r(r, theta) - truncation_r(r - h, theta)) / h < 1e-4);
  }
}

TEST_CASE("sum_beams on an empty set is zero") {
  BeamSet bs;
  bs.dim = 2;
  bs.epsilon = 0.01;
  const Field f = sum_beams(bs, box_grid(2, -1, 1, 11), 0.1);
  CHECK(f.max_abs() == 0.0);
  CHECK(f.values.size() == 121);
}

TEST_CASE("sum_beams matches a brute-force superposition") {
  std::mt19937_64 rng(17);
  for (int d = 1; d <= 3; ++d) {
    const double eps = 0.005;
    const BeamSet bs = random_beams(rng, d, 40, eps);
    const Grid g = box_grid(d, -1.0, 1.0, d == 3 ? 21 : 41);
    const double theta = 0.15;
    const Field f = sum_beams(bs, g, theta);
    const double norm = std::pow(2.0 * std::numbers::pi * eps, -0.5 * d);
    double worst = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      const VecD x = g.point(n);
      Spinor ref = Spinor::Zero();
      for (const auto& b : bs.beams) ref += norm * b.weight * truncation_r(x - b.y, theta) * evaluate_beam(b, x, eps);
      worst = std::max(worst, (f.values[n] - ref).norm());
    }
    CHECK(worst < 1e-12 * std::max(1.0, f.max_abs()));
  }
}

TEST_CASE("single beam with a wide cut-off") {
  const double eps = 0.01;
  BeamSet bs;
  bs.dim = 2;
  bs.epsilon = eps;
  BeamState s = gauss_beam(VecD(Eigen::Vector2d(0.1, -0.2)), VecD(Eigen::Vector2d(0.5, 1.0)),
                           (0.3 + kI) * MatDc::Identity(2, 2), Spinor(1, kI, 0, 0.5));
  s.weight = 0.04;
  bs.beams = {s};
  const Grid g = box_grid(2, -1, 1, 21);
  const Field f = sum_beams(bs, g, 10.0);
  const double norm = 1.0 / (2.0 * std::numbers::pi * eps);
  for (std::size_t n = 0; n < g.size(); ++n)
    CHECK((f.values[n] - norm * s.weight * evaluate_beam(s, g.point(n), eps)).norm() < 1e-13);
}

TEST_CASE("decay and truncation consistency") {
  std::mt19937_64 rng(3);
  const double eps = 0.002;
  const BeamSet bs = random_beams(rng, 2, 30, eps);
  for (const auto& b : bs.beams) {
    const double mu = min_imag_hessian_eig(hessian_of(b));
    for (int k = 0; k < 20; ++k) {
      const VecD x = VecD(Eigen::Vector2d(testing::random_vec3(rng).head<2>()));
      const double bound = b.u0.norm() * std::exp(-mu * (x - b.y).squaredNorm() / (2.0 * eps));
      CHECK(evaluate_beam(b, x, eps).norm() <= bound * (1.0 + 1e-12));
    }
  }
  // exp(-mu theta^2 / 2 eps) < 1e-14 makes the cut-off invisible.
  double mu = 1e300;
  for (const auto& b : bs.beams) mu = std::min(mu, min_imag_hessian_eig(hessian_of(b)));
  const double theta = std::sqrt(2.0 * eps * 14.0 * std::log(10.0) / mu) * 1.01;
  const Grid g = box_grid(2, -1, 1, 61);
  const Field cut = sum_beams(bs, g, theta);
  const Field wide = sum_beams(bs, g, 100.0);
  double diff = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) diff = std::max(diff, (cut.values[n] - wide.values[n]).norm());
  CHECK(diff < 1e-12);

  const double dflt = default_theta(bs);
  CHECK(dflt == doctest::Approx(std::max(3.0 * std::sqrt(eps / mu), 5.0 * std::sqrt(eps))));
}

TEST_CASE("pinned slice equals the matching nodes of the full grid") {
  std::mt19937_64 rng(21);
  const BeamSet bs = random_beams(rng, 3, 30, 0.01);
  const Grid full = box_grid(3, -1, 1, 11);
  const Grid slice(std::vector<Axis>{{-1, 1, 11, false}, {-1, 1, 11, false}, {0.0, 0.0, 1, false}});
  const Field a = sum_beams(bs, full, 0.3);
  const Field b = sum_beams(bs, slice, 0.3);
  for (std::size_t i = 0; i < 11; ++i)
    for (std::size_t j = 0; j < 11; ++j)
      CHECK((a.values[full.flat({i, j, 5})] - b.values[slice.flat({i, j, 0})]).norm() < 1e-13);
}

TEST_CASE("sum_beams is bitwise independent of the thread count") {
  std::mt19937_64 rng(8);
  const BeamSet bs = random_beams(rng, 2, 300, 0.003);
  const Grid g = box_grid(2, -1, 1, 129);
  set_threads(1);
  const Field a = sum_beams(bs, g, 0.2);
  set_threads(5);
  const Field b = sum_beams(bs, g, 0.2);
  set_threads(0);
  bool same = true;
  for (std::size_t n = 0; n < g.size(); ++n) same = same && a.values[n] == b.values[n];
  CHECK(same);
}

TEST_CASE("sum_beams rejects a grid of the wrong dimension") {
  std::mt19937_64 rng(8);
  const BeamSet bs = random_beams(rng, 2, 3, 0.01);
  CHECK_THROWS_AS(sum_beams(bs, box_grid(3, -1, 1, 5), 0.2), std::invalid_argument);
  CHECK_THROWS_AS(sum_beams(bs, box_grid(2, -1, 1, 5), 0.0), std::invalid_argument);
}

TEST_CASE("initial data reconstruction converges as epsilon shrinks") {
  ZeroPotential zero;
  for (int d : {1, 2}) {
    const InitialData data = example1_data(d);
    std::vector<double> eps_list{1.0 / 256, 1.0 / 1024, 1.0 / 4096};
    if (d == 1) eps_list.push_back(1.0 / 16384);
    std::vector<double> errs;
    for (double eps : eps_list) {
      const BeamSet bs = init_beams(data, beam_mesh(d, -0.5, 0.5, 0.5 * std::sqrt(eps)), eps, zero);
      const Grid g = box_grid(d, -0.3, 0.3, d == 1 ? 601 : 121);
      const Field f = sum_beams(bs, g, default_theta(bs));
      double err = 0.0;
      for (std::size_t n = 0; n < g.size(); ++n) err = std::max(err, (f.values[n] - data.wave(g.point(n), eps)).norm());
      errs.push_back(err);
    }
    for (std::size_t k = 1; k < errs.size(); ++k) {
      const double rate = std::log(errs[k - 1] / errs[k]) / std::log(eps_list[k - 1] / eps_list[k]);
      MESSAGE("d=" << d << " eps=" << eps_list[k] << " err=" << errs[k] << " rate=" << rate);
      CHECK(rate >= 0.5);
    }
    // At the origin the reconstruction is close to (1,0,0,0).
    const double eps = eps_list.back();
    const BeamSet bs = init_beams(data, beam_mesh(d, -0.5, 0.5, 0.5 * std::sqrt(eps)), eps, zero);
    const Grid origin(std::vector<Axis>(static_cast<std::size_t>(d), Axis{0.0, 0.0, 1, false}));
    const Field f0 = sum_beams(bs, origin, default_theta(bs));
    CHECK((f0.values[0] - Spinor(1, 0, 0, 0)).norm() < 5.0 * std::sqrt(eps));
  }
}

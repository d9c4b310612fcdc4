// Acceptance runner: one PASS/FAIL line per criterion.
#include <sys/resource.h>

#include <boost/numeric/odeint.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diracgb/analysis.hpp"
#include "diracgb/beams.hpp"
#include "diracgb/dirac.hpp"
#include "diracgb/eulerian.hpp"
#include "diracgb/harness.hpp"
#include "diracgb/io.hpp"
#include "diracgb/spectral.hpp"
#include "diracgb/summation.hpp"
#include "diracgb/threads.hpp"
#include "test_support.hpp"

using namespace dgb;
namespace fs = std::filesystem;
using dgb::testing::TrigPotential;
using dgb::testing::random_spinor;
using dgb::testing::random_vec3;

namespace {

// Collects named checks; a criterion passes when all of them do.
class Checks {
 public:
  void check(bool ok, const std::string& what) {
    std::cout << "  [" << (ok ? "ok" : "FAILED") << "] " << what << "\n" << std::flush;
    if (!ok) failed_.push_back(what);
  }
  bool passed() const { return failed_.empty(); }
  std::size_t failures() const { return failed_.size(); }

 private:
  std::vector<std::string> failed_;
};

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

bool within(double value, double target, double frac) { return std::abs(value - target) <= frac * target; }

double two_point_rate(double e1, double err1, double e2, double err2) { return std::log(err1 / err2) / std::log(e1 / e2); }

PhasePoint pp3(const Vec3& x, const Vec3& xi) { return PhasePoint(VecD(x), VecD(xi)); }

const ErrorRow* find_row(const ExperimentResult& r, double eps, double t, const std::string& variant) {
  for (const auto& row : r.errors)
    if (row.variant == variant && row.t == t && row.report.epsilon == eps) return &row;
  return nullptr;
}

const RateRow* find_rate(const ExperimentResult& r, const std::string& norm, const std::string& variant, double t) {
  for (const auto& row : r.rates)
    if (row.norm == norm && row.variant == variant && row.t == t) return &row;
  return nullptr;
}

double peak_rss_gib() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return static_cast<double>(u.ru_maxrss) / (1024.0 * 1024.0);  // ru_maxrss is in KiB
}

// ---------------------------------------------------------------------------

void criterion1(Checks& c, const fs::path& out) {
  ExperimentConfig cfg;
  cfg.example = "example1";
  cfg.dim = 3;
  cfg.epsilons = {1.0 / 256, 1.0 / 512, 1.0 / 1024, 1.0 / 2048};
  cfg.times = {0.5};
  cfg.field_format = "none";
  cfg.out_dir = (out / "criterion1").string();
  const ExperimentResult r = run_experiment(cfg, &std::cout);
  const std::map<double, double> table{{1.0 / 256, 5.00e-1}, {1.0 / 512, 3.16e-1}};
  for (const auto& [eps, ref] : table) {
    const ErrorRow* row = find_row(r, eps, 0.5, "mesh_avg");
    const double linf = row ? row->report.linf : std::nan("");
    c.check(row && within(linf, ref, 0.30),
            "eps 1/" + num(1 / eps) + ": linf " + num(linf) + " vs published " + num(ref) + " (+-30%)");
  }
  const RateRow* rate = find_rate(r, "linf", "mesh_avg", 0.5);
  const double s = rate ? rate->fit.slope : std::nan("");
  c.check(rate && s >= 0.65 && s <= 0.95, "linf rate over 1/256..1/2048: " + num(s) + " in [0.65, 0.95]");
}

void criterion2(Checks& c, const fs::path& out) {
  ExperimentConfig cfg;
  cfg.example = "example2";
  cfg.dim = 2;
  cfg.compare = "spectral";
  cfg.spectral_points = 2048;
  cfg.epsilons = {1.0 / 512, 1.0 / 1024};
  cfg.times = {0.38, 0.56};
  cfg.field_format = "none";
  cfg.out_dir = (out / "criterion2").string();
  const ExperimentResult r = run_experiment(cfg, &std::cout);

  const double e1 = 1.0 / 512, e2 = 1.0 / 1024;
  struct Target {
    double t;
    const char* variant;
    bool relative;
    double v1, v2, rate;
  };
  for (const Target& tg : {Target{0.38, "mesh_avg", false, 8.36e-1, 5.40e-1, 0.81},
                           Target{0.56, "gb_normalized", true, 1.76e-1, 1.06e-1, 0.82}}) {
    const ErrorRow* a = find_row(r, e1, tg.t, tg.variant);
    const ErrorRow* b = find_row(r, e2, tg.t, tg.variant);
    if (!a || !b) {
      c.check(false, "missing error rows at t = " + num(tg.t));
      continue;
    }
    const double x1 = tg.relative ? a->report.linf_rel : a->report.linf;
    const double x2 = tg.relative ? b->report.linf_rel : b->report.linf;
    const std::string label = std::string("t = ") + num(tg.t) + (tg.relative ? " relative linf " : " linf ");
    c.check(within(x1, tg.v1, 0.40), label + "eps 1/512: " + num(x1) + " vs published " + num(tg.v1) + " (+-40%)");
    c.check(within(x2, tg.v2, 0.40), label + "eps 1/1024: " + num(x2) + " vs published " + num(tg.v2) + " (+-40%)");
    const double rate = two_point_rate(e1, x1, e2, x2);
    c.check(std::abs(rate - tg.rate) <= 0.25, label + "two-point rate " + num(rate) + " vs " + num(tg.rate) + " (+-0.25)");
  }
}

void criterion3(Checks& c) {
  std::mt19937_64 rng(2024);
  const auto& dm = dirac_matrices();
  const Mat4c I4 = Mat4c::Identity();
  {
    double worst = 0.0;
    for (int j = 0; j < 3; ++j) {
      worst = std::max(worst, (dm.alpha[j] * dm.beta + dm.beta * dm.alpha[j]).norm());
      worst = std::max(worst, (dm.alpha[j] * dm.alpha[j] - I4).norm());
      worst = std::max(worst, (dm.alpha[j] - dm.alpha[j].adjoint()).norm());
      for (int k = j + 1; k < 3; ++k) worst = std::max(worst, (dm.alpha[j] * dm.alpha[k] + dm.alpha[k] * dm.alpha[j]).norm());
    }
    worst = std::max(worst, (dm.beta * dm.beta - I4).norm());
    c.check(worst == 0.0, "Dirac algebra identities exact (max defect " + num(worst) + ")");
  }
  {
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      TrigPotential pot(rng);
      const auto p = pp3(random_vec3(rng, 2.0), random_vec3(rng, 3.0));
      const Mat4c plus = projector(Branch::Plus, p, pot), minus = projector(Branch::Minus, p, pot);
      for (const Mat4c& d : {Mat4c(plus * plus - plus), Mat4c(minus * minus - minus), Mat4c(plus * minus),
                             Mat4c(minus * plus), Mat4c(plus + minus - I4), Mat4c(plus - plus.adjoint())})
        worst = std::max(worst, d.norm());
    }
    c.check(worst < 1e-13, "projectors at 1000 random points: max defect " + num(worst) + " < 1e-13");
  }
  {
    const double step = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      TrigPotential pot(rng);
      const Vec3 x = random_vec3(rng, 1.5), xi = random_vec3(rng, 2.0);
      for (Branch b : {Branch::Plus, Branch::Minus}) {
        const auto d = h_derivatives3(b, x, xi, pot);
        const auto rel = [](double fd, double exact) { return std::abs(fd - exact) / std::max(1.0, std::abs(exact)); };
        for (int i = 0; i < 3; ++i) {
          const Vec3 e = step * Vec3::Unit(i);
          const double fy = (eigenvalue_h(b, pp3(x + e, xi), pot) - eigenvalue_h(b, pp3(x - e, xi), pot)) / (2 * step);
          const double fk = (eigenvalue_h(b, pp3(x, xi + e), pot) - eigenvalue_h(b, pp3(x, xi - e), pot)) / (2 * step);
          worst = std::max({worst, rel(fy, d.grad_y[i]), rel(fk, d.grad_xi[i])});
          const auto yp = h_derivatives3(b, x + e, xi, pot), ym = h_derivatives3(b, x - e, xi, pot);
          const auto kp = h_derivatives3(b, x, xi + e, pot), km = h_derivatives3(b, x, xi - e, pot);
          for (int j = 0; j < 3; ++j) {
            worst = std::max(worst, rel((yp.grad_y[j] - ym.grad_y[j]) / (2 * step), d.hess_yy(i, j)));
            worst = std::max(worst, rel((yp.grad_xi[j] - ym.grad_xi[j]) / (2 * step), d.hess_yxi(i, j)));
            worst = std::max(worst, rel((kp.grad_xi[j] - km.grad_xi[j]) / (2 * step), d.hess_xixi(i, j)));
          }
        }
      }
    }
    c.check(worst < 1e-6, "h derivatives vs central differences: max rel. deviation " + num(worst) + " < 1e-6");
  }
  {
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      TrigPotential pot(rng, false);
      const auto p = pp3(random_vec3(rng, 1.5), random_vec3(rng, 2.0));
      for (Branch b : {Branch::Plus, Branch::Minus})
        worst = std::max(worst, (transport_matrix(b, p, pot) - transport_matrix_unmagnetized(b, p, pot)).norm());
    }
    c.check(worst < 1e-12, "transport matrix A = 0 reduction: max deviation " + num(worst) + " < 1e-12");
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double eps = 1.0 / (32 << (i % 4));
      const Vec3 xi = random_vec3(rng, 3.0);
      const double dt = 0.05 * (i % 7 + 1);
      const Mat4c K = alpha_dot(xi) + dm.beta;
      worst = std::max(worst, (kinetic_multiplier(xi, dt, eps) - testing::expm_i_hermitian(K, -dt / eps)).norm());
      const Vec3 A = random_vec3(rng);
      const double V = random_vec3(rng)[0];
      const Mat4c H = alpha_dot(A) - V * I4;
      worst = std::max(worst, (potential_multiplier(V, A, 0.01 * (i % 5 + 1), eps) -
                               testing::expm_i_hermitian(H, 0.01 * (i % 5 + 1) / eps))
                                  .norm());
    }
    c.check(worst < 1e-12, "spectral multipliers vs dense exponentials: max deviation " + num(worst) + " < 1e-12");
  }
  {
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
    PolynomialCoefficients pc;
    pc.Q = Mat3::Identity();
    pc.a = Vec3(0.1, 0, 0.2);
    pc.B << 0.0, 0.5, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0;
    const Field f1 = solver.strang_solve(f0, 0.5, 0.01, PolynomialPotential(pc));
    const double drift = std::abs(mass(f1) - mass(f0)) / mass(f0);
    c.check(drift < 1e-12, "spectral mass conservation (magnetic potential): rel. drift " + num(drift) + " < 1e-12");
  }
  {
    const double eps = 1.0 / 64;
    const Grid g = periodic_grid(2, -0.5, 0.5, 128);
    const SpectralSolver solver(g, eps);
    const Field f0 = sample_initial(example2_data(2), g, eps);
    const Field one = solver.strang_solve(f0, 0.3, 0.3, ZeroPotential());
    const Field many = solver.strang_solve(f0, 0.3, 0.003, ZeroPotential());
    double d = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) d = std::max(d, (one.values[n] - many.values[n]).norm());
    c.check(d < 1e-10, "free spectral evolution independent of the step: " + num(d) + " < 1e-10");
  }
}

// Ray/Riccati system for an independent integration: y, xi, Re M, Im M.
struct RiccatiSystem {
  const PotentialModel* pot;
  Branch branch;
  using State = std::vector<double>;
  void operator()(const State& z, State& dz, double) const {
    const Vec3 y(z[0], z[1], z[2]), xi(z[3], z[4], z[5]);
    Eigen::Matrix3cd M;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        M(i, j) = Complex(z[static_cast<std::size_t>(6 + 3 * i + j)], z[static_cast<std::size_t>(15 + 3 * i + j)]);
    const auto h = h_derivatives3(branch, y, xi, *pot);
    const Eigen::Matrix3cd dM = -(h.hess_yy.cast<Complex>() + h.hess_yxi.cast<Complex>() * M +
                                  M * h.hess_yxi.transpose().cast<Complex>() + M * h.hess_xixi.cast<Complex>() * M);
    for (int i = 0; i < 3; ++i) {
      dz[static_cast<std::size_t>(i)] = h.grad_xi[i];
      dz[static_cast<std::size_t>(3 + i)] = -h.grad_y[i];
      for (int j = 0; j < 3; ++j) {
        dz[static_cast<std::size_t>(6 + 3 * i + j)] = dM(i, j).real();
        dz[static_cast<std::size_t>(15 + 3 * i + j)] = dM(i, j).imag();
      }
    }
  }
};

BeamSet example_beams(const InitialData& data, double eps, const PotentialModel& pot) {
  return init_beams(data, beam_mesh(data.dim, -0.5, 0.5, 0.5 * std::sqrt(eps)), eps, pot);
}

void criterion4(Checks& c) {
  // Symplectic invariant and polarisation over t in [0, 1] for the three example potentials.
  {
    const ZeroPotential zero;
    const HarmonicPotential harmonic;
    struct Case {
      const char* name;
      InitialData data;
      const PotentialModel* pot;
    };
    double sym = 0.0, leak = 0.0;
    std::size_t beams = 0;
    for (const Case& k : {Case{"example1", example1_data(3), &zero}, Case{"example2", example2_data(3), &zero},
                          Case{"example3", example3_data(3), &harmonic}}) {
      const double eps = 1.0 / 64;
      BeamOptions opts;
      opts.check_invariants = false;  // measured here instead
      BeamSet bs = example_beams(k.data, eps, *k.pot);
      beams += bs.beams.size();
      for (int step = 1; step <= 4; ++step) {
        bs = evolve(std::move(bs), 0.25 * step, 0.5 * std::sqrt(eps), *k.pot, opts);
        for (const auto& s : bs.beams) {
          sym = std::max(sym, (s.P.transpose() * s.R - s.R.transpose() * s.P).norm());
          const Branch other = s.branch == Branch::Plus ? Branch::Minus : Branch::Plus;
          const double n = s.u0.norm();
          if (n > 0.0) leak = std::max(leak, (projector(other, PhasePoint(s.y, s.xi), *k.pot) * s.u0).norm() / n);
        }
      }
    }
    c.check(sym < 1e-8, "P^T R - R^T P over t in [0,1], " + std::to_string(beams) + " beams of examples 1-3: max " +
                            num(sym) + " < 1e-8");
    c.check(leak <= 1e-6, "projector preservation |Pi_other u0| / |u0|: max " + num(leak) + " <= 1e-6");
  }
  // Im M stays positive definite through the example 2 caustic.
  {
    const double eps = 1.0 / 1024;
    const ZeroPotential zero;
    BeamOptions opts;
    opts.check_invariants = false;
    BeamSet bs = example_beams(example2_data(2), eps, zero);
    double lowest = std::numeric_limits<double>::infinity();
    const double dt = 0.5 * std::sqrt(eps);
    for (int k = 1; k <= 14; ++k) {
      bs = evolve(std::move(bs), k == 14 ? 0.56 : 0.04 * k, dt, zero, opts);
      for (const auto& s : bs.beams) lowest = std::min(lowest, min_imag_hessian_eig(hessian_of(s)));
    }
    c.check(lowest > 0.0 && bs.t == 0.56, "Im M SPD for all " + std::to_string(bs.beams.size()) +
                                               " example 2 beams through t = 0.56: min eigenvalue " + num(lowest));
  }
  // M = R P^-1 against a direct Riccati integration.
  {
    namespace ode = boost::numeric::odeint;
    std::mt19937_64 rng(31);
    double worst = 0.0;
    for (int trial = 0; trial < 6; ++trial) {
      TrigPotential pot(rng, trial % 2 == 0);
      const Branch b = trial < 3 ? Branch::Plus : Branch::Minus;
      GaussianPacket gp;
      gp.dim = 3;
      gp.center = VecD(random_vec3(rng, 0.5));
      gp.momentum = VecD(random_vec3(rng));
      BeamState s;
      s.y = gp.center;
      s.xi = gp.momentum;
      s.P = MatDc::Identity(3, 3);
      s.R = kI * MatDc::Identity(3, 3);
      s.branch = b;
      s.y0 = s.y;
      s.weight = 1.0;
      s.u0 = projector(b, PhasePoint(s.y, s.xi), pot) * random_spinor(rng);
      RiccatiSystem sys{&pot, b};
      RiccatiSystem::State z(24, 0.0);
      for (int i = 0; i < 3; ++i) {
        z[static_cast<std::size_t>(i)] = s.y[i];
        z[static_cast<std::size_t>(3 + i)] = s.xi[i];
        z[static_cast<std::size_t>(15 + 4 * i)] = 1.0;
      }
      BeamSet bs;
      bs.beams = {s};
      bs.dim = 3;
      bs.epsilon = 1.0 / 256;
      for (int k = 1; k <= 4; ++k) {
        const double t = 0.25 * k;
        ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<RiccatiSystem::State>>(1e-13, 1e-13), sys,
                                z, t - 0.25, t, 1e-3);
        bs = evolve(std::move(bs), t, 0.005, pot);
        const MatDc M = hessian_of(bs.beams[0]);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            worst = std::max(worst, std::abs(M(i, j) - Complex(z[static_cast<std::size_t>(6 + 3 * i + j)],
                                                                 z[static_cast<std::size_t>(15 + 3 * i + j)])));
      }
    }
    c.check(worst < 1e-8, "M = R P^-1 vs direct Riccati integration (6 beams, t <= 1): max " + num(worst) + " < 1e-8");
  }
  // Energy drift under step halving: about 16x for generic potentials. The
  // harmonic case is superconvergent (about 32x), so it only gets a lower bound.
  {
    const auto drift_ratio = [](const PotentialModel& pot) {
      BeamState s;
      s.y = VecD(Vec3(0.7, 0.2, -0.4));
      s.xi = VecD(Vec3(0.8, -0.3, 0.5));
      s.P = MatDc::Identity(3, 3);
      s.R = kI * MatDc::Identity(3, 3);
      s.y0 = s.y;
      s.weight = 1.0;
      s.u0 = projector(Branch::Plus, PhasePoint(s.y, s.xi), pot) * Spinor(1, 0, 0, 0);
      const double h0 = eigenvalue_h(Branch::Plus, PhasePoint(s.y, s.xi), pot);
      std::array<double, 2> drift{};
      for (int k = 0; k < 2; ++k) {
        BeamSet bs;
        bs.beams = {s};
        bs.dim = 3;
        bs.epsilon = 1.0 / 256;
        const auto st = evolve(bs, 2.0, 0.025 / (1 << k), pot).beams[0];
        drift[static_cast<std::size_t>(k)] = std::abs(eigenvalue_h(Branch::Plus, PhasePoint(st.y, st.xi), pot) - h0);
      }
      return drift[0] / drift[1];
    };
    std::mt19937_64 rng(12);
    std::string list;
    bool ok = true;
    for (int k = 0; k < 4; ++k) {
      const TrigPotential pot(rng, k % 2 == 0);
      const double r = drift_ratio(pot);
      ok = ok && r > 12.0 && r < 24.0;
      list += (k ? ", " : "") + num(r, 3);
    }
    c.check(ok, "h drift reduction under step halving, four smooth random potentials: " + list + " (about 16)");
    const double rh = drift_ratio(HarmonicPotential());
    c.check(rh > 12.0, "h drift reduction under step halving, harmonic potential: " + num(rh, 3) + " (at least 12)");
  }
}

InitialData bump_data(double b) {
  GaussianPacket p;
  p.dim = 1;
  p.center = VecD::Zero(1);
  p.cosine_bump = b;
  return gaussian_packet(p);
}

double observed_order(const std::vector<double>& errs) {
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < errs.size(); ++k) lowest = std::min(lowest, std::log2(errs[k - 1] / errs[k]));
  return lowest;
}

void criterion5(Checks& c) {
  const ZeroPotential zero;
  const InitialData data = bump_data(0.05);
  {
    std::vector<double> errs;
    for (std::size_t n : {21, 41, 81}) {
      const PhaseSpaceFields f = init_phase_fields(data, phase_grid(1, -0.5, 0.5, n, -0.6, 0.6, 21), Branch::Plus, zero);
      double err = 0.0;
      for (std::size_t node = 0; node < f.size(); ++node) {
        const std::size_t i = node / f.grid.stride(0);
        if (i == 0 || i + 1 == n) continue;
        err = std::max(err, std::abs(hessian_from_levelset(f, node)(0, 0) - Complex(data.phase_hess(f.y(node))(0, 0), 1.0)));
      }
      errs.push_back(err);
    }
    const double p = observed_order(errs);
    c.check(p > 1.8, "t = 0 Hessian M = S_I'' + i: errors " + num(errs[0]) + ", " + num(errs[1]) + ", " + num(errs[2]) +
                         ", order " + num(p, 3));
  }
  {
    const double t = 0.5, dt = 0.1;
    std::vector<double> errs;
    for (std::size_t n : {31, 61, 121}) {
      PhaseSpaceFields f = init_phase_fields(data, phase_grid(1, -1.5, 1.5, n, -1, 1, 21), Branch::Plus, zero);
      f = evolve_phase(std::move(f), t, dt, zero);
      double err = 0.0;
      for (std::size_t node = 0; node < f.size(); ++node) {
        const double y = f.y(node)[0], xi = f.xi(node)[0];
        if (std::abs(y) > 0.5) continue;
        const double lam = std::sqrt(xi * xi + 1.0);
        const VecD y0 = VecD::Constant(1, y - xi / lam * t);
        err = std::max(err, std::abs(f.phi[node] - Complex(xi - data.phase_grad(y0)[0], -y0[0])));
        err = std::max(err, std::abs(f.S[node] - (data.phase(y0) - t / lam)));
      }
      errs.push_back(err);
    }
    const double p = observed_order(errs);
    c.check(p > 1.8, "free transport vs exact characteristics: errors " + num(errs[0]) + ", " + num(errs[1]) + ", " +
                         num(errs[2]) + ", order " + num(p, 3));
  }
  {
    const double eps = 1.0 / 256, t = 0.3;
    const Grid eval = box_grid(1, -0.3, 0.3, 241);
    BeamSet bs = example_beams(data, eps, zero);
    bs = evolve(std::move(bs), t, 0.005, zero);
    const Field lag = sum_beams(bs, eval, default_theta(bs));
    std::vector<double> diffs;
    for (std::size_t n : {33, 65, 129}) {
      const Grid phase = phase_grid(1, -0.5, 0.5, n, -0.6, 0.6, n);
      auto plus = evolve_phase(init_phase_fields(data, phase, Branch::Plus, zero), t, 0.01, zero);
      auto minus = evolve_phase(init_phase_fields(data, phase, Branch::Minus, zero), t, 0.01, zero);
      const Field eul = reconstruct(plus, minus, eval, eps, std::nullopt, 2.0);
      diffs.push_back(error_norms(eul, lag).linf / lag.max_abs());
    }
    const bool monotone = diffs[1] < diffs[0] && diffs[2] < diffs[1];
    c.check(monotone && diffs[2] <= 0.05, "compressive phase, Eulerian vs Lagrangian at t = 0.3: rel. linf " +
                                              num(diffs[0]) + ", " + num(diffs[1]) + ", " + num(diffs[2]) +
                                              " (decreasing, last <= 0.05)");
  }
}

void criterion6(Checks& c, const fs::path& out) {
  namespace ode = boost::numeric::odeint;
  ExperimentConfig cfg;
  cfg.example = "example3";
  cfg.dim = 3;
  cfg.compare = "none";
  cfg.epsilons = {1.0 / 512};
  cfg.times = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  cfg.write_beams = true;
  cfg.field_format = "binary";
  cfg.out_dir = (out / "criterion6").string();
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult r = run_experiment(cfg, &std::cout);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "  run finished in " << num(secs, 3) << " s\n";
  for (const auto& n : r.notes) std::cout << "  note: " << n << "\n";

  const PotentialPtr pot = experiment_potential(cfg);
  const InitialData data = experiment_data(cfg);
  std::vector<BeamSet> snaps;
  for (double t : cfg.times) {
    std::ostringstream name;
    name << "beams_eps1_512_t" << t << ".csv";
    snaps.push_back(read_beams_csv((fs::path(cfg.out_dir) / name.str()).string()));
  }
  const BeamSet& first = snaps.front();
  bool same_count = true;
  for (const auto& s : snaps) same_count = same_count && s.beams.size() == first.beams.size();
  c.check(same_count && !first.beams.empty(), std::to_string(snaps.size()) + " beam snapshots of " +
                                                  std::to_string(first.beams.size()) + " beams written");
  if (!same_count || first.beams.empty()) return;

  double hdrift = 0.0;
  for (std::size_t b = 0; b < first.beams.size(); ++b) {
    const auto& s0 = first.beams[b];
    const double h0 = eigenvalue_h(s0.branch, PhasePoint(s0.y, s0.xi), *pot);
    for (const auto& snap : snaps) {
      const auto& s = snap.beams[b];
      hdrift = std::max(hdrift, std::abs(eigenvalue_h(s.branch, PhasePoint(s.y, s.xi), *pot) - h0));
    }
  }
  c.check(hdrift < 1e-6, "h conserved along every beam to t = 8: max drift " + num(hdrift) + " < 1e-6");

  // Independent adaptive ray integration for every beam.
  const std::size_t total = first.beams.size();
  double worst = 0.0;
  for (std::size_t b = 0; b < total; ++b) {
    const auto& s0 = first.beams[b];
    const Branch br = s0.branch;
    const PotentialModel& p = *pot;
    auto rhs = [&p, br](const std::array<double, 6>& z, std::array<double, 6>& dz, double) {
      const auto h = h_derivatives3(br, Vec3(z[0], z[1], z[2]), Vec3(z[3], z[4], z[5]), p);
      for (int i = 0; i < 3; ++i) {
        dz[static_cast<std::size_t>(i)] = h.grad_xi[i];
        dz[static_cast<std::size_t>(3 + i)] = -h.grad_y[i];
      }
    };
    const VecD xi0 = data.phase_grad(s0.y0);
    std::array<double, 6> z{s0.y0[0], s0.y0[1], s0.y0[2], xi0[0], xi0[1], xi0[2]};
    double t = 0.0;
    for (std::size_t m = 0; m < snaps.size(); ++m) {
      const double target = cfg.times[m];
      if (target > t)
        ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<std::array<double, 6>>>(1e-13, 1e-13), rhs, z,
                                t, target, 1e-3);
      t = target;
      const auto& s = snaps[m].beams[b];
      for (int i = 0; i < 3; ++i) {
        worst = std::max(worst, std::abs(s.y[i] - z[static_cast<std::size_t>(i)]));
        worst = std::max(worst, std::abs(s.xi[i] - z[static_cast<std::size_t>(3 + i)]));
      }
    }
  }
  c.check(worst < 1e-6, "beam centres vs adaptive ray integration (all " + std::to_string(total) +
                            " beams, 9 snapshots): max deviation " + num(worst) + " < 1e-6");

  const double gib = peak_rss_gib();
  c.check(gib < 8.0, "peak resident memory " + num(gib, 3) + " GiB < 8 GiB");
  bool stated = false;
  for (const auto& n : r.notes) stated = stated || n.find("qualitative") != std::string::npos;
  c.check(stated, "harness states that the example 3 field target is qualitative");
}

void criterion7(Checks& c) {
  const ZeroPotential zero;
  struct Case {
    int d;
    std::vector<double> eps;
    std::size_t points;
  };
  for (const Case& k : {Case{1, {1.0 / 256, 1.0 / 1024, 1.0 / 4096, 1.0 / 16384}, 601},
                        Case{2, {1.0 / 256, 1.0 / 1024, 1.0 / 4096}, 121},
                        Case{3, {1.0 / 256, 1.0 / 512, 1.0 / 1024}, 61}}) {
    const InitialData data = example1_data(k.d);
    // d = 3 is checked on the x3 = 0 slice.
    std::vector<Axis> axes = box_grid(k.d, -0.3, 0.3, k.points).axes();
    if (k.d == 3) axes[2] = Axis{0.0, 0.0, 1, false};
    const Grid g(axes);
    std::vector<double> errs;
    for (double eps : k.eps) {
      const BeamSet bs = example_beams(data, eps, zero);
      const Field f = sum_beams(bs, g, default_theta(bs));
      double err = 0.0;
      for (std::size_t n = 0; n < g.size(); ++n) err = std::max(err, (f.values[n] - data.wave(g.point(n), eps)).norm());
      errs.push_back(err);
    }
    std::vector<std::pair<double, double>> pairs;
    std::string list;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < errs.size(); ++i) {
      pairs.emplace_back(k.eps[i], errs[i]);
      list += (i ? ", " : "") + num(errs[i]);
      if (i > 0) lowest = std::min(lowest, two_point_rate(k.eps[i - 1], errs[i - 1], k.eps[i], errs[i]));
    }
    const double slope = convergence_rate(pairs).slope;
    c.check(lowest >= 0.5, "d = " + std::to_string(k.d) + ": sup errors " + list + ", fitted rate " + num(slope) +
                               ", smallest two-point rate " + num(lowest) + " >= 0.5");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for diracgb. Prints one PASS/FAIL line per criterion."};
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7};
  std::string out = "diracgb-acceptance";
  int threads = 0;
  app.add_option("--criteria", criteria, "Criteria to run (1-7)")->delimiter(',')->check(CLI::Range(1, 7));
  app.add_option("--out", out, "Directory for run outputs");
  app.add_option("--threads", threads, "Worker threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_threads(threads);

  const std::map<int, std::pair<std::string, std::function<void(Checks&)>>> table{
      {1, {"example 1 convergence (lagrangian, x3 = 0 slice, exact reference)", [&](Checks& c) { criterion1(c, out); }}},
      {2, {"example 2 convergence (2D, spectral reference 2048^2)", [&](Checks& c) { criterion2(c, out); }}},
      {3, {"property suite", criterion3}},
      {4, {"beam dynamics suite", criterion4}},
      {5, {"Eulerian suite (d = 1)", criterion5}},
      {6, {"example 3 (3D, eps = 1/512, t = 8)", [&](Checks& c) { criterion6(c, out); }}},
      {7, {"initial-data reconstruction", criterion7}},
  };

  const std::set<int> chosen(criteria.begin(), criteria.end());
  std::map<int, std::string> lines;
  bool all = true;
  for (int k : chosen) {
    const auto& [title, run] = table.at(k);
    std::cout << "criterion " << k << ": " << title << "\n" << std::flush;
    Checks checks;
    const auto start = std::chrono::steady_clock::now();
    try {
      run(checks);
    } catch (const std::exception& e) {
      checks.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << "criterion " << k << ": " << (checks.passed() ? "PASS" : "FAIL") << " (" << title << "; "
         << std::fixed << std::setprecision(1) << secs << " s";
    if (!checks.passed()) line << "; " << checks.failures() << " check(s) failed";
    line << ")";
    lines[k] = line.str();
    std::cout << lines[k] << "\n\n" << std::flush;
    all = all && checks.passed();
  }
  std::cout << "summary\n";
  for (const auto& [k, l] : lines) std::cout << l << "\n";
  return all ? 0 : 1;
}

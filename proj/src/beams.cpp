#include "diracgb/beams.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "diracgb/dirac.hpp"
#include "parallel.hpp"

namespace dgb {

std::size_t BeamSet::count(Branch b) const {
  return static_cast<std::size_t>(
      std::count_if(beams.begin(), beams.end(), [b](const BeamState& s) { return s.branch == b; }));
}

BeamSet init_beams(const InitialData& data, const Grid& y0_grid, double eps, const PotentialModel& pot,
                   const BeamOptions& opts) {
  if (!(eps > 0.0)) throw std::invalid_argument("init_beams: epsilon must be positive");
  if (y0_grid.size() == 0) throw std::invalid_argument("init_beams: empty beam grid");
  if (y0_grid.dim() != data.dim) throw std::invalid_argument("init_beams: grid and data dimensions differ");

  const int d = data.dim;
  const double weight = y0_grid.cell_volume();
  std::vector<BeamState> all;
  all.reserve(2 * y0_grid.size());
  double largest = 0.0;

  for (std::size_t n = 0; n < y0_grid.size(); ++n) {
    const VecD y0 = y0_grid.point(n);
    const VecD xi = data.phase_grad(y0);
    const Spinor uI = data.amplitude(y0);
    const PhasePoint pp(y0, xi);
    for (Branch b : {Branch::Plus, Branch::Minus}) {
      BeamState s;
      s.y = y0;
      s.xi = xi;
      s.S = data.phase(y0);
      s.P = MatDc::Identity(d, d);
      s.R = data.phase_hess(y0).cast<Complex>() + kI * MatDc::Identity(d, d);
      s.u0 = projector(b, pp, pot) * uI;
      s.branch = b;
      s.y0 = y0;
      s.weight = weight;
      largest = std::max(largest, s.u0.norm());
      all.push_back(std::move(s));
    }
  }

  BeamSet bs;
  bs.epsilon = eps;
  bs.dim = d;
  bs.t = 0.0;
  const double cutoff = opts.drop_threshold * largest;
  // Plus-branch beams first, then minus, each in mesh order.
  for (Branch b : {Branch::Plus, Branch::Minus})
    for (auto& s : all)
      if (s.branch == b && s.u0.norm() >= cutoff && s.u0.norm() > 0.0) bs.beams.push_back(s);
  return bs;
}

BeamDerivative beam_rhs(const BeamState& s, const PotentialModel& pot, DivergenceMode mode) {
  const int d = s.dim();
  const Vec3 x = pad3(s.y);
  const Vec3 xi = pad3(s.xi);
  const HDerivatives3 hd = h_derivatives3(s.branch, x, xi, pot);

  const MatD hyy = hd.hess_yy.topLeftCorner(d, d);
  const MatD hyxi = hd.hess_yxi.topLeftCorner(d, d);
  const MatD hxixi = hd.hess_xixi.topLeftCorner(d, d);
  const MatD hxiy = hyxi.transpose();

  BeamDerivative out;
  out.dy = hd.grad_xi.head(d);
  out.dxi = -hd.grad_y.head(d);
  out.dS = hd.grad_xi.dot(xi) - hd.value;
  out.dP = hxiy.cast<Complex>() * s.P + hxixi.cast<Complex>() * s.R;
  out.dR = -hyy.cast<Complex>() * s.P - hyxi.cast<Complex>() * s.R;

  Complex div = hxiy.trace();
  if (mode == DivergenceMode::Total) {
    const MatDc M = s.R * s.P.inverse();
    div += (hxixi.cast<Complex>() * M).trace();
  }
  out.du0 = -0.5 * div * s.u0 + transport_matrix(s.branch, x, xi, hd, pot) * s.u0;
  return out;
}

namespace {

BeamState advance(const BeamState& s, const BeamDerivative& k, double h) {
  BeamState out = s;
  out.y += h * k.dy;
  out.xi += h * k.dxi;
  out.S += h * k.dS;
  out.P += h * k.dP;
  out.R += h * k.dR;
  out.u0 += h * k.du0;
  return out;
}

}  // namespace

BeamState rk4_step(const BeamState& s, double dt, const PotentialModel& pot, DivergenceMode mode) {
  const BeamDerivative k1 = beam_rhs(s, pot, mode);
  const BeamDerivative k2 = beam_rhs(advance(s, k1, 0.5 * dt), pot, mode);
  const BeamDerivative k3 = beam_rhs(advance(s, k2, 0.5 * dt), pot, mode);
  const BeamDerivative k4 = beam_rhs(advance(s, k3, dt), pot, mode);
  BeamState out = s;
  const double w = dt / 6.0;
  out.y += w * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
  out.xi += w * (k1.dxi + 2.0 * k2.dxi + 2.0 * k3.dxi + k4.dxi);
  out.S += w * (k1.dS + 2.0 * k2.dS + 2.0 * k3.dS + k4.dS);
  out.P += w * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
  out.R += w * (k1.dR + 2.0 * k2.dR + 2.0 * k3.dR + k4.dR);
  out.u0 += w * (k1.du0 + 2.0 * k2.du0 + 2.0 * k3.du0 + k4.du0);
  return out;
}

MatDc hessian_of(const BeamState& s, double symmetry_tol) {
  const Complex det = s.P.determinant();
  if (!(std::abs(det) > 1e-12)) {
    std::ostringstream os;
    os << "singular P (|det P| = " << std::abs(det) << ") for beam from y0 = " << s.y0.transpose();
    throw InvariantViolation(os.str());
  }
  const MatDc M = s.R * s.P.inverse();
  const double asym = (M - M.transpose()).norm();
  if (asym > symmetry_tol * std::max(1.0, M.norm())) {
    std::ostringstream os;
    os << "non-symmetric Hessian (asymmetry " << asym << ") for beam from y0 = " << s.y0.transpose();
    throw InvariantViolation(os.str());
  }
  return 0.5 * (M + M.transpose());
}

double min_imag_hessian_eig(const MatDc& M) {
  const MatD im = 0.5 * (M.imag() + M.imag().transpose());
  Eigen::SelfAdjointEigenSolver<MatD> es(im, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void check_beam(const BeamState& s, std::size_t index, double t, const PotentialModel& pot,
                const BeamOptions& opts) {
  auto fail = [&](const std::string& what, std::optional<double> value) {
    std::ostringstream os;
    os << "beam " << index << " (branch " << to_string(s.branch) << ") at t = " << t << ": " << what;
    if (value) os << " " << std::scientific << std::setprecision(3) << *value;
    throw InvariantViolation(os.str());
  };
  if (!s.y.allFinite() || !s.xi.allFinite() || !std::isfinite(s.S) || !s.u0.allFinite()) fail("non-finite state", std::nullopt);
  const double det = std::abs(s.P.determinant());
  if (!(det > opts.min_det_P)) fail("singular P, |det P|", det);
  const MatDc M = s.R * s.P.inverse();
  const double asym = (M - M.transpose()).norm();
  if (asym > opts.symmetry_tol * std::max(1.0, M.norm())) fail("M not symmetric, asymmetry", asym);
  const double mu = min_imag_hessian_eig(M);
  if (!(mu > 0.0)) fail("Im M lost positive definiteness, min eigenvalue", mu);
  const double unorm = s.u0.norm();
  if (unorm > 0.0) {
    const Branch other = s.branch == Branch::Plus ? Branch::Minus : Branch::Plus;
    const double leak = (projector(other, PhasePoint(s.y, s.xi), pot) * s.u0).norm();
    if (leak > opts.projector_tol * unorm) fail("projector leakage", leak / unorm);
  }
}

BeamSet evolve(BeamSet bs, double t_final, double dt, const PotentialModel& pot, const BeamOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
  if (t_final < bs.t) throw std::invalid_argument("evolve: target time precedes the beam set time");
  const double t0 = bs.t;
  const double span = t_final - t0;
  if (span == 0.0) return bs;

  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
  const std::size_t n = bs.beams.size();
  FirstError first;

#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < n; ++i) {
    if (first.has_error_before(i)) continue;
    try {
      BeamState s = bs.beams[i];
      for (std::size_t k = 0; k < steps; ++k) {
        const double ta = t0 + static_cast<double>(k) * dt;
        const double tb = (k + 1 == steps) ? t_final : t0 + static_cast<double>(k + 1) * dt;
        s = rk4_step(s, tb - ta, pot, opts.divergence);
        if (opts.check_invariants) check_beam(s, i, tb, pot, opts);
      }
      bs.beams[i] = std::move(s);
    } catch (...) {
      first.record(i, std::current_exception());
    }
  }
  first.rethrow();
  bs.t = t_final;
  return bs;
}

Grid beam_mesh(int d, double lo, double hi, double spacing) {
  if (!(spacing > 0.0) || !(hi > lo)) throw std::invalid_argument("beam_mesh: invalid box or spacing");
  const double c = 0.5 * (lo + hi);
  const auto half = static_cast<std::size_t>(std::floor(0.5 * (hi - lo) / spacing + 1e-9));
  const double extent = static_cast<double>(half) * spacing;
  std::vector<Axis> axes(static_cast<std::size_t>(d), Axis{c - extent, c + extent, 2 * half + 1, false});
  if (half == 0) throw std::invalid_argument("beam_mesh: spacing larger than the box");
  return Grid(std::move(axes));
}

}  // namespace dgb

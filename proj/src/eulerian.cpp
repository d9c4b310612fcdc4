#include "diracgb/eulerian.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "diracgb/dirac.hpp"
#include "diracgb/summation.hpp"

namespace dgb {

namespace {

constexpr double kSingularDet = 1e-10;

double axis_coord(const Grid& g, std::size_t node, int k) {
  return g.axis(k).coord((node / g.stride(k)) % g.axis(k).count);
}

std::size_t axis_index(const Grid& g, std::size_t node, int k) { return (node / g.stride(k)) % g.axis(k).count; }

// Centred differences of phi along every phase axis; one-sided on the faces.
// Jy(i, k) = d phi_k / d y_i, Jxi(i, k) = d phi_k / d xi_i.
void levelset_jacobians(const PhaseSpaceFields& f, std::size_t node, MatDc& Jy, MatDc& Jxi) {
  const int d = f.dim;
  Jy.resize(d, d);
  Jxi.resize(d, d);
  for (int a = 0; a < 2 * d; ++a) {
    const Axis& ax = f.grid.axis(a);
    const std::size_t i = axis_index(f.grid, node, a);
    const std::size_t s = f.grid.stride(a);
    std::size_t lo = node, hi = node;
    double span = ax.spacing();
    if (i > 0) lo = node - s;
    if (i + 1 < ax.count) hi = node + s;
    if (i > 0 && i + 1 < ax.count) span *= 2.0;
    for (int k = 0; k < d; ++k) {
      const Complex v = (f.phi[hi * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] -
                         f.phi[lo * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)]) /
                        span;
      if (a < d) Jy(a, k) = v;
      else Jxi(a - d, k) = v;
    }
  }
}

// M at every node; singular nodes get M = 0 and are counted.
std::vector<Complex> hessian_field(const PhaseSpaceFields& f, std::size_t& singular) {
  const int d = f.dim;
  const auto dd = static_cast<std::size_t>(d * d);
  std::vector<Complex> M(f.size() * dd, Complex(0.0));
  std::size_t bad = 0;
  const auto n = static_cast<long>(f.size());
#pragma omp parallel for schedule(static) reduction(+ : bad)
  for (long i = 0; i < n; ++i) {
    const auto node = static_cast<std::size_t>(i);
    MatDc Jy, Jxi;
    levelset_jacobians(f, node, Jy, Jxi);
    if (!(std::abs(Jxi.determinant()) > kSingularDet)) {
      ++bad;
      continue;
    }
    const MatDc m = -Jy * Jxi.inverse();
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) M[node * dd + static_cast<std::size_t>(r * d + c)] = m(r, c);
  }
  singular = bad;
  return M;
}

// Multilinear interpolation stencil for a point of the phase box.
struct Stencil {
  std::array<std::size_t, 16> node{};
  std::array<double, 16> weight{};
  int count = 0;
  bool clamped = false;
};

Stencil stencil(const Grid& g, const VecD& y, const VecD& xi) {
  const int d = static_cast<int>(y.size());
  const int axes = 2 * d;
  std::array<std::size_t, 4> base{};
  std::array<double, 4> frac{};
  Stencil st;
  for (int a = 0; a < axes; ++a) {
    const Axis& ax = g.axis(a);
    double c = a < d ? y[a] : xi[a - d];
    if (c < ax.min || c > ax.max) {
      st.clamped = true;
      c = std::clamp(c, ax.min, ax.max);
    }
    const double h = ax.spacing();
    const double pos = (c - ax.min) / h;
    auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 > ax.count - 2) i0 = ax.count - 2;
    base[static_cast<std::size_t>(a)] = i0;
    frac[static_cast<std::size_t>(a)] = std::clamp(pos - static_cast<double>(i0), 0.0, 1.0);
  }
  st.count = 1 << axes;
  for (int corner = 0; corner < st.count; ++corner) {
    std::size_t node = 0;
    double w = 1.0;
    for (int a = 0; a < axes; ++a) {
      const bool up = (corner >> a) & 1;
      const auto au = static_cast<std::size_t>(a);
      node += (base[au] + (up ? 1 : 0)) * g.stride(a);
      w *= up ? frac[au] : 1.0 - frac[au];
    }
    st.node[static_cast<std::size_t>(corner)] = node;
    st.weight[static_cast<std::size_t>(corner)] = w;
  }
  return st;
}

void flow(Branch b, const VecD& y, const VecD& xi, const PotentialModel& pot, VecD& dy, VecD& dxi) {
  const int d = static_cast<int>(y.size());
  const HDerivatives3 hd = h_derivatives3(b, pad3(y), pad3(xi), pot);
  dy = hd.grad_xi.head(d);
  dxi = -hd.grad_y.head(d);
}

}  // namespace

Grid phase_grid(int d, double y_lo, double y_hi, std::size_t ny, double xi_lo, double xi_hi, std::size_t nxi) {
  if (d < 1 || d > 2) throw std::invalid_argument("phase grids support d = 1 or 2");
  std::vector<Axis> axes;
  for (int k = 0; k < d; ++k) axes.push_back(Axis{y_lo, y_hi, ny, false});
  for (int k = 0; k < d; ++k) axes.push_back(Axis{xi_lo, xi_hi, nxi, false});
  return Grid(std::move(axes));
}

VecD PhaseSpaceFields::y(std::size_t node) const {
  VecD out(dim);
  for (int k = 0; k < dim; ++k) out[k] = axis_coord(grid, node, k);
  return out;
}

VecD PhaseSpaceFields::xi(std::size_t node) const {
  VecD out(dim);
  for (int k = 0; k < dim; ++k) out[k] = axis_coord(grid, node, dim + k);
  return out;
}

PhaseSpaceFields init_phase_fields(const InitialData& data, const Grid& grid, Branch b, const PotentialModel& pot,
                                   AmplitudeInit mode) {
  const int d = data.dim;
  if (d < 1 || d > 2) throw std::invalid_argument("the Eulerian method supports d = 1 or 2 only");
  if (grid.dim() != 2 * d) throw std::invalid_argument("phase grid must have 2d axes");
  for (const auto& a : grid.axes())
    if (a.periodic || a.pinned() || a.count < 3) throw std::invalid_argument("phase grid axes must be closed, >= 3 points");

  PhaseSpaceFields f;
  f.grid = grid;
  f.dim = d;
  f.branch = b;
  const std::size_t n = grid.size();
  f.phi.resize(n * static_cast<std::size_t>(d));
  f.S.resize(n);
  f.u0.resize(n);

  // grad S_I must stay inside the xi box with room for the delta support.
  for (std::size_t node = 0; node < n; ++node) {
    bool xi_origin = true;
    for (int k = 0; k < d; ++k) xi_origin = xi_origin && axis_index(grid, node, d + k) == 0;
    if (!xi_origin) continue;
    const VecD g = data.phase_grad(f.y(node));
    for (int k = 0; k < d; ++k) {
      const Axis& ax = grid.axis(d + k);
      const double margin = 4.0 * ax.spacing();
      if (g[k] < ax.min + margin || g[k] > ax.max - margin) {
        std::ostringstream os;
        os << "xi box [" << ax.min << ", " << ax.max << "] does not contain grad S_I = " << g[k] << " (component "
           << k + 1 << ") with margin " << margin;
        throw std::invalid_argument(os.str());
      }
    }
  }

  const auto total = static_cast<long>(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < total; ++i) {
    const auto node = static_cast<std::size_t>(i);
    const VecD y = f.y(node), xi = f.xi(node);
    const VecD g = data.phase_grad(y);
    for (int k = 0; k < d; ++k) f.phi[node * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] = Complex(xi[k] - g[k], -y[k]);
    f.S[node] = data.phase(y);
    const VecD& at = mode == AmplitudeInit::Pointwise ? xi : g;
    f.u0[node] = projector(b, PhasePoint(y, at), pot) * data.amplitude(y);
  }
  return f;
}

void trace_back(Branch b, VecD& y, VecD& xi, double dt, const PotentialModel& pot) {
  const double h = -dt;
  VecD k1y, k1x, k2y, k2x, k3y, k3x, k4y, k4x;
  flow(b, y, xi, pot, k1y, k1x);
  flow(b, y + 0.5 * h * k1y, xi + 0.5 * h * k1x, pot, k2y, k2x);
  flow(b, y + 0.5 * h * k2y, xi + 0.5 * h * k2x, pot, k3y, k3x);
  flow(b, y + h * k3y, xi + h * k3x, pot, k4y, k4x);
  y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
  xi += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
}

PhaseSpaceFields liouville_step(const PhaseSpaceFields& f, double dt, const PotentialModel& pot,
                                DivergenceMode mode) {
  if (!(dt >= 0.0)) throw std::invalid_argument("liouville_step: dt must be non-negative");
  if (dt == 0.0) return f;
  const int d = f.dim;
  const auto du = static_cast<std::size_t>(d);
  const auto dd = du * du;
  std::size_t singular = 0;
  const std::vector<Complex> M = hessian_field(f, singular);

  PhaseSpaceFields out = f;
  out.t = f.t + dt;
  out.singular = singular;
  std::size_t clamped = 0;
  const auto total = static_cast<long>(f.size());

#pragma omp parallel for schedule(static) reduction(+ : clamped)
  for (long i = 0; i < total; ++i) {
    const auto node = static_cast<std::size_t>(i);
    VecD y = f.y(node), xi = f.xi(node);
    trace_back(f.branch, y, xi, 0.5 * dt, pot);
    const VecD y_mid = y, xi_mid = xi;
    trace_back(f.branch, y, xi, 0.5 * dt, pot);

    const Stencil st = stencil(f.grid, y, xi);
    if (st.clamped) ++clamped;
    VecDc phi = VecDc::Zero(d);
    double S = 0.0;
    Spinor u = Spinor::Zero();
    MatDc Mf = MatDc::Zero(d, d);
    for (int c = 0; c < st.count; ++c) {
      const std::size_t nb = st.node[static_cast<std::size_t>(c)];
      const double w = st.weight[static_cast<std::size_t>(c)];
      if (w == 0.0) continue;
      for (std::size_t k = 0; k < du; ++k) phi[static_cast<Eigen::Index>(k)] += w * f.phi[nb * du + k];
      S += w * f.S[nb];
      u += w * f.u0[nb];
      for (int r = 0; r < d; ++r)
        for (int q = 0; q < d; ++q) Mf(r, q) += w * M[nb * dd + static_cast<std::size_t>(r * d + q)];
    }

    // Sources by the midpoint rule along the characteristic.
    const HDerivatives3 foot = h_derivatives3(f.branch, pad3(y), pad3(xi), pot);
    const MatDc Hyy = foot.hess_yy.topLeftCorner(d, d).cast<Complex>();
    const MatDc Hyx = foot.hess_yxi.topLeftCorner(d, d).cast<Complex>();
    const MatDc Hxx = foot.hess_xixi.topLeftCorner(d, d).cast<Complex>();
    const MatDc M_mid = Mf + (0.5 * dt) * (-Hyy - Hyx * Mf - Mf * Hyx.transpose() - Mf * Hxx * Mf);

    const Vec3 xm = pad3(y_mid), km = pad3(xi_mid);
    const HDerivatives3 mid = h_derivatives3(f.branch, xm, km, pot);
    Complex div = mid.hess_yxi.topLeftCorner(d, d).trace();
    if (mode == DivergenceMode::Total) div += (mid.hess_xixi.topLeftCorner(d, d).cast<Complex>() * M_mid).trace();
    const Mat4c G = -0.5 * div * Mat4c::Identity() + transport_matrix(f.branch, xm, km, mid, pot);

    for (std::size_t k = 0; k < du; ++k) out.phi[node * du + k] = phi[static_cast<Eigen::Index>(k)];
    out.S[node] = S + dt * (mid.grad_xi.dot(km) - mid.value);
    out.u0[node] = u + dt * (G * (u + 0.5 * dt * (G * u)));
  }
  out.clamped = f.clamped + clamped;
  return out;
}

PhaseSpaceFields evolve_phase(PhaseSpaceFields f, double t_final, double dt, const PotentialModel& pot,
                              DivergenceMode mode) {
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_phase: dt must be positive");
  if (t_final < f.t) throw std::invalid_argument("evolve_phase: target time precedes the field time");
  const double t0 = f.t;
  const double span = t_final - t0;
  if (span == 0.0) return f;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
  for (std::size_t k = 0; k < steps; ++k) {
    const double ta = t0 + static_cast<double>(k) * dt;
    const double tb = (k + 1 == steps) ? t_final : t0 + static_cast<double>(k + 1) * dt;
    f = liouville_step(f, tb - ta, pot, mode);
  }
  f.t = t_final;
  return f;
}

MatDc hessian_from_levelset(const PhaseSpaceFields& f, std::size_t node) {
  if (node >= f.size()) throw std::out_of_range("hessian_from_levelset: node out of range");
  MatDc Jy, Jxi;
  levelset_jacobians(f, node, Jy, Jxi);
  const double det = std::abs(Jxi.determinant());
  if (!(det > kSingularDet)) {
    std::ostringstream os;
    os << "singular grad_xi phi (|det| = " << det << ") at y = " << f.y(node).transpose()
       << ", xi = " << f.xi(node).transpose();
    throw InvariantViolation(os.str());
  }
  return -Jy * Jxi.inverse();
}

double delta_kernel(const VecD& r, const VecD& w) {
  double v = 1.0;
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    if (!(std::abs(r[k]) < w[k])) return 0.0;
    v *= (1.0 + std::cos(std::numbers::pi * r[k] / w[k])) / (2.0 * w[k]);
  }
  return v;
}

BeamSet levelset_beams(const std::vector<const PhaseSpaceFields*>& branches, double eps, double width_factor,
                       ReconstructInfo* info) {
  if (branches.empty()) throw std::invalid_argument("levelset_beams: no branches");
  const PhaseSpaceFields& first = *branches.front();
  const int d = first.dim;
  BeamSet bs;
  bs.dim = d;
  bs.epsilon = eps;
  bs.t = first.t;
  ReconstructInfo local;

  VecD w(d);
  for (int k = 0; k < d; ++k) w[k] = width_factor * first.grid.axis(d + k).spacing();
  const double cell = first.grid.cell_volume();

  for (const PhaseSpaceFields* f : branches) {
    if (f->dim != d || !f->grid.same_as(first.grid) || f->t != first.t)
      throw std::invalid_argument("levelset_beams: branches differ in grid or time");
    for (std::size_t node = 0; node < f->size(); ++node) {
      VecD re(d);
      for (int k = 0; k < d; ++k) re[k] = f->phi[node * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)].real();
      const double delta = delta_kernel(re, w);
      if (delta == 0.0) continue;
      ++local.active;
      for (int k = 0; k < d; ++k) {
        const Axis& ax = f->grid.axis(d + k);
        const double c = axis_coord(f->grid, node, d + k);
        if (c - ax.min < w[k] || ax.max - c < w[k]) {
          ++local.near_boundary;
          break;
        }
      }
      if (f->u0[node].norm() == 0.0) continue;
      MatDc M;
      try {
        M = hessian_from_levelset(*f, node);
      } catch (const InvariantViolation&) {
        ++local.skipped;
        continue;
      }
      M = (0.5 * (M + M.transpose())).eval();
      if (!(min_imag_hessian_eig(M) > 0.0)) {
        ++local.skipped;
        continue;
      }
      BeamState s;
      s.y = f->y(node);
      s.xi = f->xi(node);
      s.y0 = s.y;
      s.S = f->S[node];
      s.P = MatDc::Identity(d, d);
      s.R = M;
      s.u0 = f->u0[node];
      s.branch = f->branch;
      s.weight = delta * cell;
      bs.beams.push_back(std::move(s));
    }
  }
  if (info) *info = local;
  return bs;
}

Field reconstruct(const PhaseSpaceFields& plus, const PhaseSpaceFields& minus, const Grid& eval, double eps,
                  std::optional<double> theta, double width_factor, ReconstructInfo* info) {
  const BeamSet bs = levelset_beams({&plus, &minus}, eps, width_factor, info);
  const double th = theta ? *theta : default_theta(bs);
  return sum_beams(bs, eval, th);
}

}  // namespace dgb

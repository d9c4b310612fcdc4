#include "diracgb/summation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace dgb {

Spinor evaluate_beam(const BeamState& s, const VecD& x, double eps) {
  const MatDc M = hessian_of(s);
  const VecD dx = x - s.y;
  const Complex T = s.S + s.xi.dot(dx) + 0.5 * (dx.cast<Complex>().transpose() * M * dx.cast<Complex>())(0, 0);
  return s.u0 * std::exp(kI * T / eps);
}

double truncation_r(double r, double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("truncation_r: theta must be positive");
  if (r <= theta) return 1.0;
  if (r >= 2.0 * theta) return 0.0;
  const double s = (r - theta) / theta;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double truncation_r(const VecD& r, double theta) { return truncation_r(r.norm(), theta); }

double default_theta(const BeamSet& bs) {
  const double root = std::sqrt(bs.epsilon);
  double mu = std::numeric_limits<double>::infinity();
  for (const auto& s : bs.beams) mu = std::min(mu, min_imag_hessian_eig(hessian_of(s)));
  if (bs.beams.empty() || !(mu > 0.0)) return 5.0 * root;
  return std::max(3.0 * std::sqrt(bs.epsilon / mu), 5.0 * root);
}

namespace {

struct PreparedBeam {
  Vec3 y = Vec3::Zero();
  Vec3 xi = Vec3::Zero();
  double S = 0.0;
  Mat3 ReM = Mat3::Zero();
  Mat3 ImM = Mat3::Zero();
  Vec3 reach = Vec3::Zero();
  Spinor amp;
};

// Gaussian factors below e^{-kNegligible} are dropped; the ellipsoid where
// (x-y)^T Im M (x-y) / 2 eps <= kNegligible bounds each beam's window.
constexpr double kNegligible = 40.0;

}  // namespace

Field sum_beams(const BeamSet& bs, const Grid& grid, double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("sum_beams: theta must be positive");
  Field out(grid, bs.t, bs.epsilon);
  if (bs.beams.empty()) return out;
  const int d = bs.dim;
  if (grid.dim() != d) throw std::invalid_argument("sum_beams: grid dimension differs from beam dimension");

  const double eps = bs.epsilon;
  const double norm = std::pow(2.0 * std::numbers::pi * eps, -0.5 * d);
  std::vector<PreparedBeam> prep(bs.beams.size());
  for (std::size_t j = 0; j < bs.beams.size(); ++j) {
    const auto& s = bs.beams[j];
    const MatDc M = hessian_of(s);
    auto& p = prep[j];
    p.y.head(d) = s.y;
    p.xi.head(d) = s.xi;
    p.S = s.S;
    p.ReM.topLeftCorner(d, d) = M.real();
    p.ImM.topLeftCorner(d, d) = M.imag();
    p.amp = s.u0 * (norm * s.weight);
    const MatD cov = M.imag().inverse();
    for (int k = 0; k < d; ++k) {
      const double r = std::sqrt(2.0 * kNegligible * eps * cov(k, k));
      p.reach[k] = std::isfinite(r) && r > 0.0 ? std::min(r, 2.0 * theta) : 2.0 * theta;
    }
  }

  const auto& axes = grid.axes();
  // Index window of a beam along axis k; empty when hi < lo.
  auto window = [&](const PreparedBeam& p, int k, long& lo, long& hi) {
    const Axis& a = axes[static_cast<std::size_t>(k)];
    if (a.pinned()) {
      lo = 0;
      hi = std::abs(a.min - p.y[k]) < p.reach[k] ? 0 : -1;
      return;
    }
    const double h = a.spacing();
    lo = std::max<long>(0, static_cast<long>(std::ceil((p.y[k] - p.reach[k] - a.min) / h)));
    hi = std::min<long>(static_cast<long>(a.count) - 1, static_cast<long>(std::floor((p.y[k] + p.reach[k] - a.min) / h)));
  };

  const long n0 = static_cast<long>(axes[0].count);
  const long slab = std::max<long>(1, n0 / 64);
  const long slabs = (n0 + slab - 1) / slab;
  // Rows run along the last non-pinned axis and are swept by recurrence.
  int in = d - 1;
  while (in > 0 && axes[static_cast<std::size_t>(in)].pinned()) --in;
  const auto inu = static_cast<std::size_t>(in);
  const Axis& inner = axes[inu];
  const double hin = inner.pinned() ? 0.0 : inner.spacing();
  const Complex ie = kI / eps;

#pragma omp parallel for schedule(dynamic, 1)
  for (long sl = 0; sl < slabs; ++sl) {
    const long s_lo = sl * slab;
    const long s_hi = std::min(n0, s_lo + slab) - 1;
    std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
    Vec3 u = Vec3::Zero();
    for (const auto& p : prep) {
      bool empty = false;
      for (int k = 0; k < d && !empty; ++k) {
        window(p, k, lo[static_cast<std::size_t>(k)], hi[static_cast<std::size_t>(k)]);
        empty = hi[static_cast<std::size_t>(k)] < lo[static_cast<std::size_t>(k)];
      }
      if (empty) continue;
      lo[0] = std::max(lo[0], s_lo);
      hi[0] = std::min(hi[0], s_hi);
      if (hi[0] < lo[0]) continue;
      const Eigen::Matrix3cd Mc = p.ReM.cast<Complex>() + kI * p.ImM.cast<Complex>();

      // Rows along the innermost axis; outer indices advance odometer style.
      std::array<long, 3> idx = lo;
      while (true) {
        std::size_t base = 0;
        for (int k = 0; k < d; ++k) {
          if (k == in) continue;
          const auto ku = static_cast<std::size_t>(k);
          u[k] = axes[ku].coord(static_cast<std::size_t>(idx[ku])) - p.y[k];
          base += static_cast<std::size_t>(idx[ku]) * grid.stride(k);
        }
        // dx = u + j h e_in with u[in] the offset of node 0 of the row.
        u[in] = inner.min - p.y[in];
        const double r2_perp = u.head(d).squaredNorm() - u[in] * u[in];
        // Chord of the row where (dx^T Im M dx) / 2 eps <= kNegligible.
        const double qa = hin * hin * p.ImM(in, in);
        const double qb = 2.0 * hin * (p.ImM.row(in).head(d).dot(u.head(d)));
        const double qc = u.head(d).dot(p.ImM.topLeftCorner(d, d) * u.head(d)) - 2.0 * kNegligible * eps;
        long jlo = lo[inu], jhi = hi[inu];
        if (qa > 0.0) {
          const double disc = qb * qb - 4.0 * qa * qc;
          if (disc < 0.0) jhi = jlo - 1;
          else {
            const double root = std::sqrt(disc);
            jlo = std::max(jlo, static_cast<long>(std::ceil((-qb - root) / (2.0 * qa))));
            jhi = std::min(jhi, static_cast<long>(std::floor((-qb + root) / (2.0 * qa))));
          }
        } else if (qc > 0.0) {
          jhi = jlo - 1;
        }

        if (jlo <= jhi) {
          // E(j) = (i / eps)(S + xi.dx + dx^T M dx / 2) = c0 + c1 j + c2 j^2.
          const Complex c0 = ie * (p.S + p.xi.head(d).dot(u.head(d)) +
                                   0.5 * u.head(d).cast<Complex>().dot(Mc.topLeftCorner(d, d) * u.head(d).cast<Complex>()));
          const Complex mu = (Mc.row(in).head(d) * u.head(d).cast<Complex>())(0);
          const Complex c1 = ie * hin * (p.xi[in] + mu);
          const Complex c2 = ie * (0.5 * hin * hin * Mc(in, in));
          const double jl = static_cast<double>(jlo);
          Complex g = std::exp(c0 + jl * (c1 + jl * c2));
          Complex ratio = std::exp(c1 + (2.0 * jl + 1.0) * c2);
          const Complex step = std::exp(2.0 * c2);
          for (long j = jlo; j <= jhi; ++j) {
            const double dxin = u[in] + static_cast<double>(j) * hin;
            const double cut = truncation_r(std::sqrt(r2_perp + dxin * dxin), theta);
            if (cut > 0.0) out.values[base + static_cast<std::size_t>(j) * grid.stride(in)] += (cut * g) * p.amp;
            g *= ratio;
            ratio *= step;
          }
        }

        int k = d - 1;
        while (k >= 0) {
          const auto ku = static_cast<std::size_t>(k);
          if (k != in) {
            if (++idx[ku] <= hi[ku]) break;
            idx[ku] = lo[ku];
          }
          --k;
        }
        if (k < 0) break;
      }
    }
  }
  return out;
}

}  // namespace dgb

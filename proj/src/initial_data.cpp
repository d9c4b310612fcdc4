#include "diracgb/initial_data.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dgb {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("initial data dimension must be 1, 2 or 3");
}

double envelope(const VecD& x, const VecD& c, double w) { return std::exp(-(x - c).squaredNorm() / (4.0 * w * w)); }

}  // namespace

InitialData gaussian_packet(GaussianPacket p) {
  check_dim(p.dim);
  if (p.center.size() == 0) p.center = VecD::Zero(p.dim);
  if (p.momentum.size() == 0) p.momentum = VecD::Zero(p.dim);
  if (p.center.size() != p.dim || p.momentum.size() != p.dim)
    throw std::invalid_argument("gaussian_packet: center/momentum dimension mismatch");
  if (!(p.width > 0.0)) throw std::invalid_argument("gaussian_packet: width must be positive");

  constexpr double tau = 2.0 * std::numbers::pi;
  const int d = p.dim;

  InitialData data;
  data.name = "custom";
  data.dim = d;
  data.phase = [p, d](const VecD& x) {
    double bump = 1.0;
    for (int k = 0; k < d; ++k) bump *= 1.0 + std::cos(tau * x[k]);
    return p.momentum.dot(x) + 0.5 * p.curvature * (x - p.center).squaredNorm() + p.cosine_bump * bump;
  };
  data.phase_grad = [p, d](const VecD& x) {
    VecD g = p.momentum + p.curvature * (x - p.center);
    if (p.cosine_bump != 0.0) {
      for (int k = 0; k < d; ++k) {
        double others = 1.0;
        for (int j = 0; j < d; ++j)
          if (j != k) others *= 1.0 + std::cos(tau * x[j]);
        g[k] += -p.cosine_bump * tau * std::sin(tau * x[k]) * others;
      }
    }
    return g;
  };
  data.phase_hess = [p, d](const VecD& x) {
    MatD h = p.curvature * MatD::Identity(d, d);
    if (p.cosine_bump != 0.0) {
      VecD f(d), df(d), ddf(d);
      for (int k = 0; k < d; ++k) {
        f[k] = 1.0 + std::cos(tau * x[k]);
        df[k] = -tau * std::sin(tau * x[k]);
        ddf[k] = -tau * tau * std::cos(tau * x[k]);
      }
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double prod = 1.0;
          for (int k = 0; k < d; ++k) {
            if (i == j) prod *= (k == i) ? ddf[k] : f[k];
            else prod *= (k == i || k == j) ? df[k] : f[k];
          }
          h(i, j) += p.cosine_bump * prod;
        }
    }
    return h;
  };
  data.amplitude = [p](const VecD& x) -> Spinor { return envelope(x, p.center, p.width) * p.chi; };
  return data;
}

InitialData example1_data(int dim, double width) {
  check_dim(dim);
  GaussianPacket p;
  p.dim = dim;
  p.width = width;
  auto data = gaussian_packet(p);
  data.name = "example1";
  return data;
}

InitialData example2_data(int dim, double width) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("example2 requires dim 2 or 3");
  constexpr double tau = 2.0 * std::numbers::pi;

  InitialData data;
  data.name = "example2";
  data.dim = dim;
  data.phase = [](const VecD& x) { return (1.0 + std::cos(tau * x[0])) * (1.0 + std::cos(tau * x[1])) / 40.0; };
  data.phase_grad = [dim](const VecD& x) {
    VecD g = VecD::Zero(dim);
    const double f1 = 1.0 + std::cos(tau * x[0]), f2 = 1.0 + std::cos(tau * x[1]);
    g[0] = -tau * std::sin(tau * x[0]) * f2 / 40.0;
    g[1] = -tau * std::sin(tau * x[1]) * f1 / 40.0;
    return g;
  };
  data.phase_hess = [dim](const VecD& x) {
    MatD h = MatD::Zero(dim, dim);
    const double f1 = 1.0 + std::cos(tau * x[0]), f2 = 1.0 + std::cos(tau * x[1]);
    const double d1 = -tau * std::sin(tau * x[0]), d2 = -tau * std::sin(tau * x[1]);
    h(0, 0) = -tau * tau * std::cos(tau * x[0]) * f2 / 40.0;
    h(1, 1) = -tau * tau * std::cos(tau * x[1]) * f1 / 40.0;
    h(0, 1) = h(1, 0) = d1 * d2 / 40.0;
    return h;
  };
  auto grad = data.phase_grad;
  data.amplitude = [grad, width](const VecD& x) -> Spinor {
    const VecD g = grad(x);
    const double s1 = g[0], s2 = g[1];
    const Spinor chi(0.5 * (std::sqrt(s1 * s1 + s2 * s2 + 1.0) + 1.0), 0.0, 0.0, 0.5 * (s1 + s2));
    return std::exp(-x.squaredNorm() / (4.0 * width * width)) * chi;
  };
  return data;
}

InitialData example3_data(int dim, double width) {
  check_dim(dim);
  GaussianPacket p;
  p.dim = dim;
  p.width = width;
  const Vec3 c(0.1, -0.1, 0.0);
  p.center = c.head(dim);
  auto data = gaussian_packet(p);
  data.name = "example3";
  return data;
}

}  // namespace dgb

#include "diracgb/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "parallel.hpp"

namespace dgb {

const char* to_string(NormScaling s) { return s == NormScaling::MeshAverage ? "mesh_avg" : "raw_sum"; }

ErrorReport error_norms(const Field& a, const Field& b, NormScaling scaling) {
  if (!a.grid.same_as(b.grid) || a.values.size() != b.values.size())
    throw std::invalid_argument("error_norms: fields live on different grids");
  const std::size_t n = a.values.size();
  if (n == 0) throw std::invalid_argument("error_norms: empty fields");

  const double s1 = deterministic_sum<double>(n, [&](std::size_t i) { return (a.values[i] - b.values[i]).norm(); });
  const double s2 =
      deterministic_sum<double>(n, [&](std::size_t i) { return (a.values[i] - b.values[i]).squaredNorm(); });
  double linf = 0.0, bmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    linf = std::max(linf, (a.values[i] - b.values[i]).norm());
    bmax = std::max(bmax, b.values[i].norm());
  }

  ErrorReport r;
  r.epsilon = a.epsilon;
  r.nodes = n;
  r.grid = a.grid.describe();
  r.scaling = scaling;
  const double div = scaling == NormScaling::MeshAverage ? static_cast<double>(n) : 1.0;
  r.l1 = s1 / div;
  r.l2 = std::sqrt(s2 / div);
  r.linf = linf;
  r.linf_rel = bmax > 0.0 ? linf / bmax : std::numeric_limits<double>::quiet_NaN();
  return r;
}

RateFit convergence_rate(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw std::invalid_argument("convergence_rate: need at least two (epsilon, error) pairs");
  RateFit fit;
  double sx = 0.0, sy = 0.0;
  for (const auto& [e, err] : pairs) {
    if (!(e > 0.0) || !(err > 0.0)) throw std::invalid_argument("convergence_rate: epsilon and error must be positive");
    fit.epsilon.push_back(e);
    fit.error.push_back(err);
    sx += std::log(e);
    sy += std::log(err);
  }
  const double n = static_cast<double>(pairs.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [e, err] : pairs) {
    sxx += (std::log(e) - mx) * (std::log(e) - mx);
    sxy += (std::log(e) - mx) * (std::log(err) - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("convergence_rate: epsilon values must differ");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& [e, err] : pairs) {
    const double r = std::log(err) - (fit.intercept + fit.slope * std::log(e));
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

Spinor exact_example1(double t, const VecD& x, double eps, double width) {
  const double env = std::exp(-x.squaredNorm() / (4.0 * width * width));
  return Spinor(env * std::exp(-kI * t / eps), 0.0, 0.0, 0.0);
}

Field exact_example1_field(const Grid& grid, double t, double eps, double width) {
  Field f(grid, t, eps);
  for (std::size_t i = 0; i < grid.size(); ++i) f.values[i] = exact_example1(t, grid.point(i), eps, width);
  return f;
}

}  // namespace dgb

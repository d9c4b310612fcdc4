#include "diracgb/potential.hpp"

#include <set>

namespace dgb {

PolynomialPotential::PolynomialPotential(PolynomialCoefficients c) : c_(std::move(c)) {
  c_.Q = 0.5 * (c_.Q + c_.Q.transpose()).eval();
  magnetic_ = !(c_.a.isZero(0.0) && c_.B.isZero(0.0) && c_.C.isZero(0.0));
}

double PolynomialPotential::V(const Vec3& x) const {
  double cubic = 0.0;
  for (int i = 0; i < 3; ++i) cubic += c_.cubic[i] * x[i] * x[i] * x[i];
  return c_.v0 + c_.g.dot(x) + 0.5 * x.dot(c_.Q * x) + cubic;
}

Vec3 PolynomialPotential::grad_V(const Vec3& x) const {
  Vec3 out = c_.g + c_.Q * x;
  for (int i = 0; i < 3; ++i) out[i] += 3.0 * c_.cubic[i] * x[i] * x[i];
  return out;
}

Mat3 PolynomialPotential::hess_V(const Vec3& x) const {
  Mat3 out = c_.Q;
  for (int i = 0; i < 3; ++i) out(i, i) += 6.0 * c_.cubic[i] * x[i];
  return out;
}

Vec3 PolynomialPotential::A(const Vec3& x) const {
  Vec3 out = c_.a;
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j) out[k] += c_.B(j, k) * x[j] + c_.C(j, k) * x[j] * x[j];
  return out;
}

Mat3 PolynomialPotential::jac_A(const Vec3& x) const {
  Mat3 out = c_.B;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) out(j, k) += 2.0 * c_.C(j, k) * x[j];
  return out;
}

std::array<Mat3, 3> PolynomialPotential::hess_A(const Vec3&) const {
  std::array<Mat3, 3> out{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j) out[k](j, j) = 2.0 * c_.C(j, k);
  return out;
}

namespace {

void check_keys(const std::string& name, const std::map<std::string, double>& params,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : params) {
    if (!allowed.count(key)) throw ConfigError("potential '" + name + "': unknown parameter '" + key + "'");
  }
}

double get(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

PotentialPtr make_potential(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "zero") {
    check_keys(name, params, {});
    return std::make_shared<ZeroPotential>();
  }
  if (name == "harmonic") {
    check_keys(name, params, {"stiffness", "center1", "center2", "center3"});
    Vec3 c(get(params, "center1", 0.0), get(params, "center2", 0.0), get(params, "center3", 0.0));
    return std::make_shared<HarmonicPotential>(get(params, "stiffness", 1.0), c);
  }
  if (name == "custom-polynomial") {
    std::set<std::string> allowed{"v0"};
    const std::string idx = "123";
    for (char i : idx) {
      allowed.insert(std::string("g") + i);
      allowed.insert(std::string("c") + i);
      allowed.insert(std::string("a") + i);
      for (char j : idx) {
        allowed.insert(std::string("q") + i + j);
        allowed.insert(std::string("b") + i + j);
        allowed.insert(std::string("e") + i + j);
      }
    }
    check_keys(name, params, allowed);
    PolynomialCoefficients c;
    c.v0 = get(params, "v0", 0.0);
    for (int i = 0; i < 3; ++i) {
      const std::string si(1, idx[i]);
      c.g[i] = get(params, "g" + si, 0.0);
      c.cubic[i] = get(params, "c" + si, 0.0);
      c.a[i] = get(params, "a" + si, 0.0);
      for (int j = 0; j < 3; ++j) {
        const std::string sij = si + idx[j];
        c.Q(i, j) = get(params, "q" + sij, 0.0);
        c.B(i, j) = get(params, "b" + sij, 0.0);
        c.C(i, j) = get(params, "e" + sij, 0.0);
      }
    }
    return std::make_shared<PolynomialPotential>(c);
  }
  throw ConfigError("unknown potential '" + name + "'");
}

std::vector<std::string> registered_potentials() { return {"zero", "harmonic", "custom-polynomial"}; }

}  // namespace dgb

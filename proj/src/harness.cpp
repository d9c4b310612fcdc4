#include "diracgb/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "diracgb/beams.hpp"
#include "diracgb/eulerian.hpp"
#include "diracgb/io.hpp"
#include "diracgb/spectral.hpp"
#include "diracgb/summation.hpp"
#include "diracgb/threads.hpp"

namespace dgb {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& section, const std::string& key, const std::string& why) {
  throw ConfigError("[" + section + "] " + key + ": " + why);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool to_number(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const auto slash = t.find('/');
  if (slash != std::string::npos) {
    double num = 0.0, den = 0.0;
    if (!to_number(t.substr(0, slash), num) || !to_number(t.substr(slash + 1), den) || den == 0.0) return false;
    out = num / den;
    return true;
  }
  const char* end = t.data() + t.size();
  const auto res = std::from_chars(t.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

double number(const std::string& sec, const std::string& key, const std::string& text) {
  double v = 0.0;
  if (!to_number(text, v)) bad(sec, key, "expected a number, got '" + text + "'");
  return v;
}

std::vector<double> number_list(const std::string& sec, const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(number(sec, key, item));
  if (out.empty()) bad(sec, key, "empty list");
  return out;
}

std::size_t count(const std::string& sec, const std::string& key, const std::string& text) {
  const double v = number(sec, key, text);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) bad(sec, key, "expected a positive integer, got '" + text + "'");
  return static_cast<std::size_t>(v);
}

bool boolean(const std::string& sec, const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  bad(sec, key, "expected true or false, got '" + t + "'");
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
using Section = std::map<std::string, Setter>;

const std::map<std::string, Section>& schema() {
  static const std::map<std::string, Section> s = [] {
    std::map<std::string, Section> m;
    const std::string E = "experiment", D = "discretization", C = "custom", O = "output";
    m[E]["method"] = [](ExperimentConfig& c, const std::string& v) { c.method = trim(v); };
    m[E]["example"] = [](ExperimentConfig& c, const std::string& v) { c.example = trim(v); };
    m[E]["dim"] = [E](ExperimentConfig& c, const std::string& v) { c.dim = static_cast<int>(count(E, "dim", v)); };
    m[E]["epsilon"] = [E](ExperimentConfig& c, const std::string& v) { c.epsilons = number_list(E, "epsilon", v); };
    m[E]["times"] = [E](ExperimentConfig& c, const std::string& v) { c.times = number_list(E, "times", v); };
    m[E]["compare"] = [](ExperimentConfig& c, const std::string& v) { c.compare = trim(v); };
    m[E]["threads"] = [E](ExperimentConfig& c, const std::string& v) {
      const double t = number(E, "threads", v);
      if (t < 0 || t != std::floor(t)) bad(E, "threads", "expected a non-negative integer");
      c.threads = static_cast<int>(t);
    };
    m[D]["dt_factor"] = [D](ExperimentConfig& c, const std::string& v) { c.dt_factor = number(D, "dt_factor", v); };
    m[D]["dy_factor"] = [D](ExperimentConfig& c, const std::string& v) { c.dy_factor = number(D, "dy_factor", v); };
    m[D]["domain"] = [D](ExperimentConfig& c, const std::string& v) {
      const auto l = number_list(D, "domain", v);
      if (l.size() != 2) bad(D, "domain", "expected 'lo, hi'");
      c.domain_lo = l[0];
      c.domain_hi = l[1];
    };
    m[D]["eval_points"] = [D](ExperimentConfig& c, const std::string& v) { c.eval_points = count(D, "eval_points", v); };
    m[D]["slice"] = [D](ExperimentConfig& c, const std::string& v) { c.slice = boolean(D, "slice", v); };
    m[D]["theta"] = [D](ExperimentConfig& c, const std::string& v) {
      if (trim(v) == "auto") c.theta.reset();
      else c.theta = number(D, "theta", v);
    };
    m[D]["spectral_points"] = [D](ExperimentConfig& c, const std::string& v) {
      c.spectral_points = count(D, "spectral_points", v);
    };
    m[D]["spectral_dt"] = [D](ExperimentConfig& c, const std::string& v) { c.spectral_dt = number(D, "spectral_dt", v); };
    m[D]["phase_y_points"] = [D](ExperimentConfig& c, const std::string& v) {
      c.phase_y_points = count(D, "phase_y_points", v);
    };
    m[D]["phase_xi_points"] = [D](ExperimentConfig& c, const std::string& v) {
      c.phase_xi_points = count(D, "phase_xi_points", v);
    };
    m[D]["xi_range"] = [D](ExperimentConfig& c, const std::string& v) {
      const auto l = number_list(D, "xi_range", v);
      if (l.size() != 2) bad(D, "xi_range", "expected 'lo, hi'");
      c.xi_lo = l[0];
      c.xi_hi = l[1];
    };
    m[D]["delta_width"] = [D](ExperimentConfig& c, const std::string& v) { c.delta_width = number(D, "delta_width", v); };
    m[D]["divergence"] = [](ExperimentConfig& c, const std::string& v) { c.divergence = trim(v); };
    m[C]["center"] = [C](ExperimentConfig& c, const std::string& v) { c.custom_center = number_list(C, "center", v); };
    m[C]["momentum"] = [C](ExperimentConfig& c, const std::string& v) { c.custom_momentum = number_list(C, "momentum", v); };
    m[C]["width"] = [C](ExperimentConfig& c, const std::string& v) { c.custom_width = number(C, "width", v); };
    m[C]["curvature"] = [C](ExperimentConfig& c, const std::string& v) { c.custom_curvature = number(C, "curvature", v); };
    m[C]["cosine_bump"] = [C](ExperimentConfig& c, const std::string& v) {
      c.custom_cosine_bump = number(C, "cosine_bump", v);
    };
    m[O]["dir"] = [](ExperimentConfig& c, const std::string& v) { c.out_dir = trim(v); };
    m[O]["fields"] = [](ExperimentConfig& c, const std::string& v) { c.field_format = trim(v); };
    m[O]["beams"] = [O](ExperimentConfig& c, const std::string& v) { c.write_beams = boolean(O, "beams", v); };
    m[O]["memory_cap_gib"] = [O](ExperimentConfig& c, const std::string& v) {
      c.memory_cap_gib = number(O, "memory_cap_gib", v);
    };
    return m;
  }();
  return s;
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return v == o; });
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  // The INI reader only knows ';' comments; drop '#' lines as well.
  std::stringstream cleaned;
  {
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const std::string t = trim(line);
      if (!t.empty() && t[0] == '#') continue;
      cleaned << line << '\n';
    }
  }
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(cleaned, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }

  ExperimentConfig c;
  for (const auto& [section, body] : pt) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    if (section == "potential") {
      for (const auto& [key, node] : body) {
        if (key == "name") c.potential = trim(node.data());
        else c.potential_params[key] = number(section, key, node.data());
      }
      continue;
    }
    const auto sit = schema().find(section);
    if (sit == schema().end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      const auto kit = sit->second.find(key);
      if (kit == sit->second.end()) bad(section, key, "unknown key");
      kit->second(c, node.data());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[experiment]\n"
     << "method = " << c.method << "\n"
     << "example = " << c.example << "\n"
     << "dim = " << c.dim << "\n"
     << "epsilon = " << fmt_list(c.epsilons) << "\n"
     << "times = " << fmt_list(c.times) << "\n"
     << "compare = " << c.compare << "\n"
     << "threads = " << c.threads << "\n\n";
  os << "[potential]\n";
  if (!c.potential.empty()) os << "name = " << c.potential << "\n";
  for (const auto& [k, v] : c.potential_params) os << k << " = " << fmt(v) << "\n";
  os << "\n[discretization]\n"
     << "dt_factor = " << fmt(c.dt_factor) << "\n"
     << "dy_factor = " << fmt(c.dy_factor) << "\n"
     << "domain = " << fmt(c.domain_lo) << ", " << fmt(c.domain_hi) << "\n"
     << "eval_points = " << c.eval_points << "\n"
     << "slice = " << (c.slice ? "true" : "false") << "\n"
     << "theta = " << (c.theta ? fmt(*c.theta) : std::string("auto")) << "\n"
     << "spectral_points = " << c.spectral_points << "\n"
     << "spectral_dt = " << fmt(c.spectral_dt) << "\n"
     << "phase_y_points = " << c.phase_y_points << "\n"
     << "phase_xi_points = " << c.phase_xi_points << "\n"
     << "xi_range = " << fmt(c.xi_lo) << ", " << fmt(c.xi_hi) << "\n"
     << "delta_width = " << fmt(c.delta_width) << "\n"
     << "divergence = " << c.divergence << "\n\n";
  if (c.example == "custom") {
    os << "[custom]\n";
    if (!c.custom_center.empty()) os << "center = " << fmt_list(c.custom_center) << "\n";
    if (!c.custom_momentum.empty()) os << "momentum = " << fmt_list(c.custom_momentum) << "\n";
    os << "width = " << fmt(c.custom_width) << "\n"
       << "curvature = " << fmt(c.custom_curvature) << "\n"
       << "cosine_bump = " << fmt(c.custom_cosine_bump) << "\n\n";
  }
  os << "[output]\n"
     << "dir = " << c.out_dir << "\n"
     << "fields = " << c.field_format << "\n"
     << "beams = " << (c.write_beams ? "true" : "false") << "\n"
     << "memory_cap_gib = " << fmt(c.memory_cap_gib) << "\n";
  return os.str();
}

void validate_config(const ExperimentConfig& c) {
  const std::string E = "experiment", D = "discretization", O = "output";
  if (!one_of(c.method, {"lagrangian", "eulerian", "spectral"}))
    bad(E, "method", "expected lagrangian, eulerian or spectral, got '" + c.method + "'");
  if (!one_of(c.example, {"example1", "example2", "example3", "custom"}))
    bad(E, "example", "expected example1, example2, example3 or custom, got '" + c.example + "'");
  if (c.dim < 1 || c.dim > 3) bad(E, "dim", "must be 1, 2 or 3");
  if (c.example == "example2" && c.dim < 2) bad(E, "dim", "example2 needs dim 2 or 3");
  if (c.method == "eulerian" && c.dim > 2)
    bad(E, "dim", "the Eulerian method supports d <= 2 (a d = 3 run needs a 6D phase grid)");
  if (c.epsilons.empty()) bad(E, "epsilon", "empty list");
  for (double e : c.epsilons)
    if (!(e > 0.0)) bad(E, "epsilon", "values must be positive");
  if (c.times.empty()) bad(E, "times", "empty list");
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    if (!(c.times[i] >= 0.0)) bad(E, "times", "values must be non-negative");
    if (i > 0 && !(c.times[i] > c.times[i - 1])) bad(E, "times", "values must be strictly increasing");
  }
  if (!one_of(c.compare, {"exact", "spectral", "none"}))
    bad(E, "compare", "expected exact, spectral or none, got '" + c.compare + "'");
  if (c.compare == "exact" && c.example != "example1")
    bad(E, "compare", "an exact solution is only available for example1");
  if (c.method == "spectral" && c.compare == "spectral") bad(E, "compare", "the spectral method cannot compare to itself");
  const bool uses_spectral = c.method == "spectral" || c.compare == "spectral";
  if (uses_spectral && c.dim == 3)
    for (double e : c.epsilons)
      if (e < 1.0 / 128) bad(E, "epsilon", "the spectral reference refuses d = 3 with epsilon < 1/128");
  if (uses_spectral && (c.spectral_points < 4 || c.spectral_points % 2 != 0))
    bad(D, "spectral_points", "must be even and at least 4");
  if (!(c.dt_factor > 0.0)) bad(D, "dt_factor", "must be positive");
  if (!(c.dy_factor > 0.0)) bad(D, "dy_factor", "must be positive");
  if (!(c.domain_hi > c.domain_lo)) bad(D, "domain", "needs lo < hi");
  if (c.eval_points < 2) bad(D, "eval_points", "needs at least 2 points");
  if (c.theta && !(*c.theta > 0.0)) bad(D, "theta", "must be positive or auto");
  if (!(c.spectral_dt >= 0.0)) bad(D, "spectral_dt", "must be non-negative");
  if (c.method == "eulerian") {
    if (c.phase_y_points < 3) bad(D, "phase_y_points", "needs at least 3 points");
    if (c.phase_xi_points < 3) bad(D, "phase_xi_points", "needs at least 3 points");
    if (!(c.xi_hi > c.xi_lo)) bad(D, "xi_range", "needs lo < hi");
    if (!(c.delta_width > 0.0)) bad(D, "delta_width", "must be positive");
  }
  if (!one_of(c.divergence, {"total", "partial"})) bad(D, "divergence", "expected total or partial");
  if (c.example == "custom") {
    if (!c.custom_center.empty() && static_cast<int>(c.custom_center.size()) != c.dim)
      bad("custom", "center", "needs dim components");
    if (!c.custom_momentum.empty() && static_cast<int>(c.custom_momentum.size()) != c.dim)
      bad("custom", "momentum", "needs dim components");
    if (!(c.custom_width > 0.0)) bad("custom", "width", "must be positive");
  }
  if (!one_of(c.field_format, {"csv", "binary", "none"})) bad(O, "fields", "expected csv, binary or none");
  if (!(c.memory_cap_gib > 0.0)) bad(O, "memory_cap_gib", "must be positive");
  if (c.out_dir.empty()) bad(O, "dir", "must not be empty");
  try {
    (void)experiment_potential(c);
  } catch (const std::exception& e) {
    bad("potential", c.potential.empty() ? "name" : c.potential, e.what());
  }
}

InitialData experiment_data(const ExperimentConfig& c) {
  if (c.example == "example1") return example1_data(c.dim);
  if (c.example == "example2") return example2_data(c.dim);
  if (c.example == "example3") return example3_data(c.dim);
  GaussianPacket p;
  p.dim = c.dim;
  if (!c.custom_center.empty()) p.center = Eigen::Map<const VecD>(c.custom_center.data(), c.dim);
  if (!c.custom_momentum.empty()) p.momentum = Eigen::Map<const VecD>(c.custom_momentum.data(), c.dim);
  p.width = c.custom_width;
  p.curvature = c.custom_curvature;
  p.cosine_bump = c.custom_cosine_bump;
  return gaussian_packet(p);
}

PotentialPtr experiment_potential(const ExperimentConfig& c) {
  std::string name = c.potential;
  if (name.empty()) name = c.example == "example3" ? "harmonic" : "zero";
  return make_potential(name, c.potential_params);
}

namespace {

bool uses_spectral(const ExperimentConfig& c) { return c.method == "spectral" || c.compare == "spectral"; }

Grid spectral_grid(const ExperimentConfig& c) { return periodic_grid(c.dim, c.domain_lo, c.domain_hi, c.spectral_points); }

// Comparison grid: the spectral mesh when one is involved, else a closed box;
// d = 3 runs with `slice` pin x3 at the node nearest 0.
Grid eval_grid(const ExperimentConfig& c) {
  std::vector<Axis> axes;
  if (uses_spectral(c)) {
    axes = spectral_grid(c).axes();
  } else {
    axes = box_grid(c.dim, c.domain_lo, c.domain_hi, c.eval_points).axes();
  }
  if (c.dim == 3 && c.slice) {
    const Axis& a = axes[2];
    const double h = a.spacing();
    const double idx = std::clamp(std::round((0.0 - a.min) / h), 0.0, static_cast<double>(a.count - 1));
    const double z = a.min + idx * h;
    axes[2] = Axis{z, z, 1, false};
  }
  return Grid(axes);
}

// Restriction of a full spectral field to the pinned slice of `target`.
Field restrict_to(const Field& full, const Grid& target) {
  if (full.grid.same_as(target)) return full;
  Field out(target, full.t, full.epsilon);
  const Axis& a = full.grid.axis(2);
  const auto k = static_cast<std::size_t>(std::llround((target.axis(2).min - a.min) / a.spacing()));
  for (std::size_t i = 0; i < target.axis(0).count; ++i)
    for (std::size_t j = 0; j < target.axis(1).count; ++j)
      out.values[target.flat({i, j, 0})] = full.values[full.grid.flat({i, j, k})];
  return out;
}

double spectral_step(const ExperimentConfig& c, double eps, const PotentialModel& pot, double span) {
  if (c.spectral_dt > 0.0) return c.spectral_dt;
  if (dynamic_cast<const ZeroPotential*>(&pot) != nullptr) return std::max(span, 1e-300);
  return 0.25 * eps;
}

std::string tag(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void write_field(const ExperimentConfig& c, const Field& f, const std::string& stem) {
  if (c.field_format == "csv") write_field_csv((fs::path(c.out_dir) / (stem + ".csv")).string(), f);
  else if (c.field_format == "binary") write_field_binary((fs::path(c.out_dir) / (stem + ".dgbf")).string(), f);
}

std::string eps_tag(double eps) {
  const double inv = 1.0 / eps;
  if (std::abs(inv - std::round(inv)) < 1e-9 * inv) return "eps1_" + std::to_string(std::llround(inv));
  return "eps" + tag(eps);
}

void push_reports(std::vector<ErrorRow>& rows, const Field& gb, const Field& ref, double t) {
  ErrorReport avg = error_norms(gb, ref, NormScaling::MeshAverage);
  ErrorReport raw = error_norms(gb, ref, NormScaling::RawSum);
  rows.push_back({avg, "mesh_avg", t});
  rows.push_back({raw, "raw_sum", t});
  // Normalised by the beam solution instead of the reference.
  ErrorReport gbn = avg;
  const double m = gb.max_abs();
  gbn.linf_rel = m > 0.0 ? avg.linf / m : std::nan("");
  rows.push_back({gbn, "gb_normalized", t});
}

}  // namespace

std::size_t estimate_memory(const ExperimentConfig& c, double eps) {
  const double spinor = sizeof(Spinor);
  double bytes = 0.0;
  const Grid eval = eval_grid(c);
  bytes += 3.0 * static_cast<double>(eval.size()) * spinor;  // field, reference, scratch
  if (uses_spectral(c)) bytes += SpectralSolver::memory_estimate(spectral_grid(c)) + 2.0 * static_cast<double>(spectral_grid(c).size()) * spinor;
  if (c.method == "lagrangian") {
    const double n = std::floor((c.domain_hi - c.domain_lo) / (c.dy_factor * std::sqrt(eps))) + 1.0;
    const double beams = 2.0 * std::pow(n, c.dim);
    const double per = sizeof(BeamState) + 8.0 * (3 * c.dim + 1) + 16.0 * 2 * c.dim * c.dim;
    bytes += 3.0 * beams * per;  // state, RK4 stages, summation prep
  } else if (c.method == "eulerian") {
    const double nodes = std::pow(static_cast<double>(c.phase_y_points) * static_cast<double>(c.phase_xi_points), c.dim);
    const double per = 16.0 * c.dim + 8.0 + spinor + 16.0 * c.dim * c.dim;
    bytes += 2.0 * 3.0 * nodes * per;  // two branches, old/new/M
  }
  return static_cast<std::size_t>(bytes);
}

std::vector<RateRow> fit_rates(const std::vector<ErrorRow>& rows) {
  std::vector<RateRow> out;
  std::vector<std::pair<std::string, double>> keys;
  for (const auto& r : rows)
    if (std::find(keys.begin(), keys.end(), std::make_pair(r.variant, r.t)) == keys.end()) keys.emplace_back(r.variant, r.t);
  for (const auto& [variant, t] : keys) {
    for (const char* norm : {"l1", "l2", "linf", "linf_rel"}) {
      std::vector<std::pair<double, double>> pairs;
      for (const auto& r : rows) {
        if (r.variant != variant || r.t != t) continue;
        const std::string n = norm;
        const double v = n == "l1" ? r.report.l1 : n == "l2" ? r.report.l2 : n == "linf" ? r.report.linf : r.report.linf_rel;
        if (v > 0.0 && std::isfinite(v)) pairs.emplace_back(r.report.epsilon, v);
      }
      std::sort(pairs.begin(), pairs.end());
      pairs.erase(std::unique(pairs.begin(), pairs.end(),
                              [](const auto& a, const auto& b) { return a.first == b.first; }),
                  pairs.end());
      if (pairs.size() < 2) continue;
      out.push_back({norm, variant, t, convergence_rate(pairs)});
    }
  }
  return out;
}

void write_errors_csv(const std::string& path, const ExperimentConfig& c, const std::vector<ErrorRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "epsilon,l1,l2,linf,linf_rel,variant,method,example,t\n";
  out << std::setprecision(17);
  for (const auto& r : rows)
    out << r.report.epsilon << ',' << r.report.l1 << ',' << r.report.l2 << ',' << r.report.linf << ','
        << r.report.linf_rel << ',' << r.variant << ',' << c.method << ',' << c.example << ',' << r.t << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

void write_rates_csv(const std::string& path, const std::vector<RateRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "norm,variant,t,slope,intercept,residual,points\n";
  out << std::setprecision(17);
  for (const auto& r : rows)
    out << r.norm << ',' << r.variant << ',' << r.t << ',' << r.fit.slope << ',' << r.fit.intercept << ','
        << r.fit.residual << ',' << r.fit.epsilon.size() << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<RateRow> rates_from_errors_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || trim(line).rfind("epsilon,l1,l2,linf,linf_rel,variant", 0) != 0)
    throw std::runtime_error(path + ": not an errors.csv file");
  std::vector<ErrorRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() < 6) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": too few columns");
    ErrorRow r;
    double vals[5];
    for (int k = 0; k < 5; ++k)
      if (!to_number(cells[static_cast<std::size_t>(k)], vals[k]) && cells[static_cast<std::size_t>(k)] != "nan")
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" + cells[static_cast<std::size_t>(k)] + "'");
      else if (cells[static_cast<std::size_t>(k)] == "nan")
        vals[k] = std::nan("");
    r.report.epsilon = vals[0];
    r.report.l1 = vals[1];
    r.report.l2 = vals[2];
    r.report.linf = vals[3];
    r.report.linf_rel = vals[4];
    r.variant = cells[5];
    if (cells.size() >= 9 && !to_number(cells[8], r.t))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad time '" + cells[8] + "'");
    rows.push_back(r);
  }
  return fit_rates(rows);
}

ExperimentResult run_experiment(const ExperimentConfig& c, std::ostream* log) {
  validate_config(c);
  const double cap = c.memory_cap_gib * 1024.0 * 1024.0 * 1024.0;
  for (double eps : c.epsilons) {
    const double need = static_cast<double>(estimate_memory(c, eps));
    if (need > cap) {
      std::ostringstream os;
      os << std::setprecision(3) << "[output] memory_cap_gib: epsilon = " << eps << " needs an estimated "
         << need / (1024.0 * 1024.0 * 1024.0) << " GiB, above the cap of " << c.memory_cap_gib << " GiB";
      throw ConfigError(os.str());
    }
  }
  if (c.threads > 0) set_threads(c.threads);
  fs::create_directories(c.out_dir);

  const InitialData data = experiment_data(c);
  const PotentialPtr pot = experiment_potential(c);
  const Grid eval = eval_grid(c);
  const DivergenceMode div = c.divergence == "partial" ? DivergenceMode::Partial : DivergenceMode::Total;
  BeamOptions bopts;
  bopts.divergence = div;

  ExperimentResult result;
  if (c.example == "example3")
    result.notes.push_back(
        "example3 has no quantitative field target; the circular motion of the packet is a qualitative check only");
  std::ostringstream meta;
  meta << serialize_config(c) << "\n[resolved]\n";
  meta << "eval_grid = " << eval.describe() << "\n";
  meta << "potential = " << (c.potential.empty() ? (c.example == "example3" ? "harmonic" : "zero") : c.potential) << "\n";

  for (double eps : c.epsilons) {
    const std::string et = eps_tag(eps);
    const double root = std::sqrt(eps);
    const double dt = c.dt_factor * root;
    if (log) *log << "epsilon = " << eps << " (" << c.method << ", " << c.example << ", d = " << c.dim << ")\n";

    BeamSet beams;
    PhaseSpaceFields plus, minus;
    std::optional<SpectralSolver> solver;
    Field psi;  // spectral method state or spectral reference
    if (c.method == "lagrangian") {
      beams = init_beams(data, beam_mesh(c.dim, c.domain_lo, c.domain_hi, c.dy_factor * root), eps, *pot, bopts);
      meta << et << ".beams = " << beams.beams.size() << "\n";
      if (log) *log << "  " << beams.beams.size() << " beams\n";
    } else if (c.method == "eulerian") {
      const Grid pg = phase_grid(c.dim, c.domain_lo, c.domain_hi, c.phase_y_points, c.xi_lo, c.xi_hi, c.phase_xi_points);
      plus = init_phase_fields(data, pg, Branch::Plus, *pot);
      minus = init_phase_fields(data, pg, Branch::Minus, *pot);
      meta << et << ".phase_grid = " << pg.describe() << "\n";
    }
    if (uses_spectral(c)) {
      const Grid sg = spectral_grid(c);
      solver.emplace(sg, eps);
      psi = sample_initial(data, sg, eps);
    }

    for (double t : c.times) {
      Field gb;
      const std::string stem = et + "_t" + tag(t);
      if (c.method == "lagrangian") {
        beams = evolve(std::move(beams), t, dt, *pot, bopts);
        const double th = c.theta ? *c.theta : default_theta(beams);
        meta << stem << ".theta = " << fmt(th) << "\n";
        gb = sum_beams(beams, eval, th);
        if (c.write_beams) write_beams_csv((fs::path(c.out_dir) / ("beams_" + stem + ".csv")).string(), beams);
      } else if (c.method == "eulerian") {
        plus = evolve_phase(std::move(plus), t, dt, *pot, div);
        minus = evolve_phase(std::move(minus), t, dt, *pot, div);
        ReconstructInfo info;
        gb = reconstruct(plus, minus, eval, eps, c.theta, c.delta_width, &info);
        meta << stem << ".active_nodes = " << info.active << "\n" << stem << ".skipped_nodes = " << info.skipped << "\n";
        if (info.near_boundary > 0) {
          std::ostringstream w;
          w << "warning: " << info.near_boundary << " active phase nodes lie within one delta width of the xi boundary"
            << " (epsilon = " << eps << ", t = " << t << "); widen [discretization] xi_range";
          result.notes.push_back(w.str());
        }
        if (plus.clamped + minus.clamped > 0) meta << stem << ".clamped_feet = " << plus.clamped + minus.clamped << "\n";
        if (c.write_beams) {
          write_phase_csv((fs::path(c.out_dir) / ("phase_plus_" + stem + ".csv")).string(), plus);
          write_phase_csv((fs::path(c.out_dir) / ("phase_minus_" + stem + ".csv")).string(), minus);
        }
      }
      if (uses_spectral(c)) {
        const double span = t - psi.t;
        if (span > 0.0) psi = solver->strang_solve(std::move(psi), t, spectral_step(c, eps, *pot, span), *pot);
        psi.t = t;
      }
      if (c.method == "spectral") gb = restrict_to(psi, eval);
      write_field(c, gb, c.method + "_" + stem);

      std::optional<Field> ref;
      if (c.compare == "exact") ref = exact_example1_field(eval, t, eps);
      else if (c.compare == "spectral") ref = restrict_to(psi, eval);
      if (ref) {
        if (c.compare == "spectral") write_field(c, *ref, "reference_" + stem);
        const std::size_t first = result.errors.size();
        push_reports(result.errors, gb, *ref, t);
        const auto& r = result.errors[first].report;
        if (log)
          *log << "  t = " << t << ": l1 " << r.l1 << "  l2 " << r.l2 << "  linf " << r.linf << "  linf_rel "
               << r.linf_rel << "\n";
      }
    }
  }

  result.rates = fit_rates(result.errors);
  write_errors_csv((fs::path(c.out_dir) / "errors.csv").string(), c, result.errors);
  write_rates_csv((fs::path(c.out_dir) / "rates.csv").string(), result.rates);
  for (const auto& n : result.notes) meta << "note = " << n << "\n";
  std::ofstream m(fs::path(c.out_dir) / "run.meta");
  m << meta.str();
  if (log)
    for (const auto& n : result.notes) *log << n << "\n";
  return result;
}

}  // namespace dgb

#include "diracgb/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dgb {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) io_fail(path, "cannot open for writing");
  return out;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) io_fail(path, "cannot open for reading");
  return in;
}

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    io_fail(path, "malformed number '" + s + "'");
  }
}

// Reads "# key=value" header lines in order.
std::string header(std::istream& in, const std::string& key, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) io_fail(path, "missing header '" + key + "'");
  const std::string prefix = "# " + key + "=";
  if (line.rfind(prefix, 0) != 0) io_fail(path, "expected header '" + prefix + "', got '" + line + "'");
  return line.substr(prefix.size());
}

void check_little_endian() {
  if constexpr (std::endian::native != std::endian::little)
    throw std::runtime_error("binary field dumps require a little-endian host");
}

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) io_fail(path, "truncated binary file");
  return v;
}

}  // namespace

Grid parse_grid(const std::string& text) {
  std::vector<Axis> axes;
  for (const auto& part : split(text, ',')) {
    const auto f = split(part, ':');
    if (f.size() != 3 && !(f.size() == 4 && f[3] == "p"))
      throw std::invalid_argument("grid axis '" + part + "' is not min:max:count[:p]");
    Axis a;
    try {
      a.min = std::stod(f[0]);
      a.max = std::stod(f[1]);
      const long c = std::stol(f[2]);
      if (c < 1) throw std::invalid_argument(f[2]);
      a.count = static_cast<std::size_t>(c);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("grid axis '" + part + "' has malformed numbers");
    }
    a.periodic = f.size() == 4;
    axes.push_back(a);
  }
  return Grid(std::move(axes));
}

void write_field_csv(const std::string& path, const Field& f) {
  auto out = open_out(path);
  const int d = f.grid.dim();
  out << "# t=" << num(f.t) << "\n# epsilon=" << num(f.epsilon) << "\n# grid=" << f.grid.describe() << "\n";
  for (int k = 0; k < d; ++k) out << 'x' << k + 1 << ',';
  out << "re1,im1,re2,im2,re3,im3,re4,im4\n";
  for (std::size_t n = 0; n < f.values.size(); ++n) {
    const auto idx = f.grid.multi(n);
    for (int k = 0; k < d; ++k) out << num(f.grid.axis(k).coord(idx[static_cast<std::size_t>(k)])) << ',';
    const Spinor& v = f.values[n];
    for (int c = 0; c < 4; ++c) out << num(v[c].real()) << ',' << num(v[c].imag()) << (c == 3 ? '\n' : ',');
  }
  if (!out) io_fail(path, "write failed");
}

Field read_field_csv(const std::string& path) {
  auto in = open_in(path);
  const double t = to_double(header(in, "t", path), path);
  const double eps = to_double(header(in, "epsilon", path), path);
  Grid grid;
  try {
    grid = parse_grid(header(in, "grid", path));
  } catch (const std::invalid_argument& e) {
    io_fail(path, e.what());
  }
  Field f(grid, t, eps);
  const int d = grid.dim();
  std::string line;
  std::getline(in, line);  // column names
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != static_cast<std::size_t>(d + 8)) io_fail(path, "row " + std::to_string(n) + " has wrong width");
    if (n >= f.values.size()) io_fail(path, "more rows than grid nodes");
    for (int c = 0; c < 4; ++c)
      f.values[n][c] = Complex(to_double(cells[static_cast<std::size_t>(d + 2 * c)], path),
                               to_double(cells[static_cast<std::size_t>(d + 2 * c + 1)], path));
    ++n;
  }
  if (n != f.values.size()) io_fail(path, "fewer rows than grid nodes");
  return f;
}

void write_beams_csv(const std::string& path, const BeamSet& bs) {
  auto out = open_out(path);
  const int d = bs.dim;
  out << "# epsilon=" << num(bs.epsilon) << "\n# dim=" << d << "\n";
  out << "t,branch";
  for (int k = 0; k < d; ++k) out << ",y" << k + 1;
  for (int k = 0; k < d; ++k) out << ",xi" << k + 1;
  out << ",S";
  for (const char* m : {"P", "R"})
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out << ',' << m << i + 1 << j + 1 << "_re," << m << i + 1 << j + 1 << "_im";
  for (int c = 0; c < 4; ++c) out << ",u" << c + 1 << "_re,u" << c + 1 << "_im";
  out << ",weight";
  for (int k = 0; k < d; ++k) out << ",y0_" << k + 1;
  out << '\n';
  for (const auto& s : bs.beams) {
    out << num(bs.t) << ',' << to_string(s.branch);
    for (int k = 0; k < d; ++k) out << ',' << num(s.y[k]);
    for (int k = 0; k < d; ++k) out << ',' << num(s.xi[k]);
    out << ',' << num(s.S);
    for (const MatDc* m : {&s.P, &s.R})
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out << ',' << num((*m)(i, j).real()) << ',' << num((*m)(i, j).imag());
    for (int c = 0; c < 4; ++c) out << ',' << num(s.u0[c].real()) << ',' << num(s.u0[c].imag());
    out << ',' << num(s.weight);
    for (int k = 0; k < d; ++k) out << ',' << num(s.y0[k]);
    out << '\n';
  }
  if (!out) io_fail(path, "write failed");
}

void write_phase_csv(const std::string& path, const PhaseSpaceFields& f) {
  auto out = open_out(path);
  const int d = f.dim;
  const auto du = static_cast<std::size_t>(d);
  out << "# t=" << num(f.t) << "\n# branch=" << to_string(f.branch) << "\n# grid=" << f.grid.describe() << '\n';
  for (int k = 0; k < d; ++k) out << (k ? ",y" : "y") << k + 1;
  for (int k = 0; k < d; ++k) out << ",xi" << k + 1;
  for (int k = 0; k < d; ++k) out << ",phi" << k + 1 << "_re,phi" << k + 1 << "_im";
  out << ",S";
  for (int c = 0; c < 4; ++c) out << ",u" << c + 1 << "_re,u" << c + 1 << "_im";
  out << '\n';
  for (std::size_t n = 0; n < f.size(); ++n) {
    const VecD y = f.y(n), xi = f.xi(n);
    for (int k = 0; k < d; ++k) out << (k ? "," : "") << num(y[k]);
    for (int k = 0; k < d; ++k) out << ',' << num(xi[k]);
    for (std::size_t k = 0; k < du; ++k) out << ',' << num(f.phi[n * du + k].real()) << ',' << num(f.phi[n * du + k].imag());
    out << ',' << num(f.S[n]);
    for (int c = 0; c < 4; ++c) out << ',' << num(f.u0[n][c].real()) << ',' << num(f.u0[n][c].imag());
    out << '\n';
  }
  if (!out) io_fail(path, "write failed");
}

BeamSet read_beams_csv(const std::string& path) {
  auto in = open_in(path);
  BeamSet bs;
  bs.epsilon = to_double(header(in, "epsilon", path), path);
  const double dd = to_double(header(in, "dim", path), path);
  if (dd != 1.0 && dd != 2.0 && dd != 3.0) io_fail(path, "dimension must be 1, 2 or 3");
  const int d = static_cast<int>(dd);
  bs.dim = d;
  const std::size_t width = static_cast<std::size_t>(2 + 2 * d + 1 + 4 * d * d + 8 + 1 + d);
  std::string line;
  std::getline(in, line);  // column names
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != width) io_fail(path, "beam row has wrong width");
    std::size_t p = 0;
    auto next = [&] { return to_double(cells[p++], path); };
    const double t = next();
    if (first) bs.t = t;
    else if (t != bs.t) io_fail(path, "beams at different times");
    first = false;
    BeamState s;
    const std::string& br = cells[p++];
    if (br != "+" && br != "-") io_fail(path, "branch must be + or -");
    s.branch = br == "+" ? Branch::Plus : Branch::Minus;
    s.y.resize(d);
    s.xi.resize(d);
    s.y0.resize(d);
    s.P.resize(d, d);
    s.R.resize(d, d);
    for (int k = 0; k < d; ++k) s.y[k] = next();
    for (int k = 0; k < d; ++k) s.xi[k] = next();
    s.S = next();
    for (MatDc* m : {&s.P, &s.R})
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const double re = next();
          (*m)(i, j) = Complex(re, next());
        }
    for (int c = 0; c < 4; ++c) {
      const double re = next();
      s.u0[c] = Complex(re, next());
    }
    s.weight = next();
    for (int k = 0; k < d; ++k) s.y0[k] = next();
    bs.beams.push_back(std::move(s));
  }
  return bs;
}

void write_field_binary(const std::string& path, const Field& f) {
  check_little_endian();
  auto out = open_out(path, true);
  out.write("DGBF", 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.dim()));
  for (const auto& a : f.grid.axes()) {
    put<double>(out, a.min);
    put<double>(out, a.max);
    put<std::uint64_t>(out, a.count);
    put<std::uint8_t>(out, a.periodic ? 1 : 0);
  }
  put<double>(out, f.t);
  put<double>(out, f.epsilon);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(Spinor)));
  if (!out) io_fail(path, "write failed");
}

Field read_field_binary(const std::string& path) {
  check_little_endian();
  auto in = open_in(path, true);
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "DGBF") io_fail(path, "not a DGBF field dump");
  if (get<std::uint32_t>(in, path) != 1) io_fail(path, "unsupported DGBF version");
  const auto d = get<std::uint32_t>(in, path);
  if (d < 1 || d > 6) io_fail(path, "bad axis count");
  std::vector<Axis> axes(d);
  for (auto& a : axes) {
    a.min = get<double>(in, path);
    a.max = get<double>(in, path);
    a.count = static_cast<std::size_t>(get<std::uint64_t>(in, path));
    a.periodic = get<std::uint8_t>(in, path) != 0;
  }
  Grid grid;
  try {
    grid = Grid(std::move(axes));
  } catch (const std::invalid_argument& e) {
    io_fail(path, e.what());
  }
  const double t = get<double>(in, path);
  const double eps = get<double>(in, path);
  Field f(grid, t, eps);
  if (!in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(Spinor))))
    io_fail(path, "truncated field data");
  return f;
}

}  // namespace dgb

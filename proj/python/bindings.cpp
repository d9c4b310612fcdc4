#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "diracgb/analysis.hpp"
#include "diracgb/beams.hpp"
#include "diracgb/dirac.hpp"
#include "diracgb/eulerian.hpp"
#include "diracgb/harness.hpp"
#include "diracgb/io.hpp"
#include "diracgb/spectral.hpp"
#include "diracgb/summation.hpp"
#include "diracgb/threads.hpp"

namespace py = pybind11;
using namespace dgb;

namespace {

using Values = py::array_t<Complex>;

Values spinors_to_array(const std::vector<Spinor>& v) {
  Values out({static_cast<py::ssize_t>(v.size()), py::ssize_t{4}});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t n = 0; n < v.size(); ++n)
    for (int k = 0; k < 4; ++k) a(static_cast<py::ssize_t>(n), k) = v[n][k];
  return out;
}

std::vector<Spinor> array_to_spinors(const py::array_t<Complex, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2 || arr.shape(1) != 4) throw std::invalid_argument("values must have shape (n, 4)");
  auto a = arr.unchecked<2>();
  std::vector<Spinor> out(static_cast<std::size_t>(arr.shape(0)));
  for (std::size_t n = 0; n < out.size(); ++n)
    for (int k = 0; k < 4; ++k) out[n][k] = a(static_cast<py::ssize_t>(n), k);
  return out;
}

py::array_t<double> grid_points(const Grid& g) {
  py::array_t<double> out({static_cast<py::ssize_t>(g.size()), static_cast<py::ssize_t>(g.dim())});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t n = 0; n < g.size(); ++n) {
    const VecD p = g.point(n);
    for (int k = 0; k < g.dim(); ++k) a(static_cast<py::ssize_t>(n), k) = p[k];
  }
  return out;
}

// pybind11 holders cannot be const.
std::shared_ptr<PotentialModel> mutable_ptr(const PotentialPtr& p) { return std::const_pointer_cast<PotentialModel>(p); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian beam methods for the semiclassical Dirac equation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

  py::enum_<Branch>(m, "Branch").value("Plus", Branch::Plus).value("Minus", Branch::Minus);
  py::enum_<DivergenceMode>(m, "DivergenceMode")
      .value("Total", DivergenceMode::Total)
      .value("Partial", DivergenceMode::Partial);
  py::enum_<NormScaling>(m, "NormScaling")
      .value("MeshAverage", NormScaling::MeshAverage)
      .value("RawSum", NormScaling::RawSum);

  m.def("set_threads", &set_threads, py::arg("n"));
  m.def("thread_count", &thread_count);

  // Dirac algebra
  m.def("dirac_matrices", [] {
    const auto& d = dirac_matrices();
    return py::make_tuple(py::make_tuple(d.alpha[0], d.alpha[1], d.alpha[2]), d.beta);
  });

  py::class_<PotentialModel, std::shared_ptr<PotentialModel>>(m, "Potential")
      .def("V", &PotentialModel::V, py::arg("x"))
      .def("grad_V", &PotentialModel::grad_V, py::arg("x"))
      .def("A", &PotentialModel::A, py::arg("x"))
      .def_property_readonly("name", &PotentialModel::name)
      .def_property_readonly("has_magnetic", &PotentialModel::has_magnetic)
      .def("__repr__", [](const PotentialModel& p) { return "<Potential " + p.name() + ">"; });
  m.def("make_potential", [](const std::string& name, const std::map<std::string, double>& params) {
    return mutable_ptr(make_potential(name, params));
  }, py::arg("name"), py::arg("params") = std::map<std::string, double>{});
  m.def("registered_potentials", &registered_potentials);

  const auto point = [](const Eigen::VectorXd& x, const Eigen::VectorXd& xi) { return PhasePoint(VecD(x), VecD(xi)); };
  m.def("dirac_symbol", [point](const Eigen::VectorXd& x, const Eigen::VectorXd& xi, const PotentialModel& pot) {
    return dirac_symbol(point(x, xi), pot);
  }, py::arg("x"), py::arg("xi"), py::arg("potential"));
  m.def("eigenvalue_h", [point](Branch b, const Eigen::VectorXd& x, const Eigen::VectorXd& xi, const PotentialModel& pot) {
    return eigenvalue_h(b, point(x, xi), pot);
  }, py::arg("branch"), py::arg("x"), py::arg("xi"), py::arg("potential"));
  m.def("projector", [point](Branch b, const Eigen::VectorXd& x, const Eigen::VectorXd& xi, const PotentialModel& pot) {
    return projector(b, point(x, xi), pot);
  }, py::arg("branch"), py::arg("x"), py::arg("xi"), py::arg("potential"));
  m.def("transport_matrix", [point](Branch b, const Eigen::VectorXd& x, const Eigen::VectorXd& xi, const PotentialModel& pot) {
    return transport_matrix(b, point(x, xi), pot);
  }, py::arg("branch"), py::arg("x"), py::arg("xi"), py::arg("potential"));

  // Grids and fields
  py::class_<Grid>(m, "Grid")
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("cell_volume", &Grid::cell_volume)
      .def("describe", &Grid::describe)
      .def("points", &grid_points)
      .def("__repr__", [](const Grid& g) { return "<Grid " + g.describe() + ">"; });
  m.def("box_grid", &box_grid, py::arg("dim"), py::arg("lo"), py::arg("hi"), py::arg("n"));
  m.def("periodic_grid", &periodic_grid, py::arg("dim"), py::arg("lo"), py::arg("hi"), py::arg("n"));
  m.def("parse_grid", &parse_grid, py::arg("text"));
  m.def("phase_grid", &phase_grid, py::arg("dim"), py::arg("y_lo"), py::arg("y_hi"), py::arg("ny"), py::arg("xi_lo"),
        py::arg("xi_hi"), py::arg("nxi"));

  py::class_<Field>(m, "Field")
      .def(py::init([](const Grid& g, double t, double eps) { return Field(g, t, eps); }), py::arg("grid"),
           py::arg("t") = 0.0, py::arg("epsilon") = 0.0)
      .def_readonly("grid", &Field::grid)
      .def_readwrite("t", &Field::t)
      .def_readwrite("epsilon", &Field::epsilon)
      .def_property(
          "values", [](const Field& f) { return spinors_to_array(f.values); },
          [](Field& f, const py::array_t<Complex, py::array::c_style | py::array::forcecast>& a) {
            auto v = array_to_spinors(a);
            if (v.size() != f.grid.size()) throw std::invalid_argument("values must have one row per grid node");
            f.values = std::move(v);
          })
      .def("max_abs", &Field::max_abs)
      .def("density", [](const Field& f) { return observables(f).density; });

  // Initial data
  py::class_<InitialData>(m, "InitialData")
      .def_readonly("name", &InitialData::name)
      .def_readonly("dim", &InitialData::dim)
      .def("phase", [](const InitialData& d, const Eigen::VectorXd& x) { return d.phase(VecD(x)); })
      .def("amplitude", [](const InitialData& d, const Eigen::VectorXd& x) { return d.amplitude(VecD(x)); })
      .def("wave", [](const InitialData& d, const Eigen::VectorXd& x, double eps) { return d.wave(VecD(x), eps); });
  m.attr("PACKET_WIDTH") = kPacketWidth;
  m.def("example1_data", &example1_data, py::arg("dim") = 3, py::arg("width") = kPacketWidth);
  m.def("example2_data", &example2_data, py::arg("dim") = 2, py::arg("width") = kPacketWidth);
  m.def("example3_data", &example3_data, py::arg("dim") = 3, py::arg("width") = kPacketWidth);
  m.def("gaussian_packet",
        [](const Eigen::VectorXd& center, const Eigen::VectorXd& momentum, double width, double curvature,
           double cosine_bump, const Spinor& chi) {
          GaussianPacket p;
          p.dim = static_cast<int>(center.size());
          p.center = VecD(center);
          p.momentum = VecD(momentum);
          p.width = width;
          p.curvature = curvature;
          p.cosine_bump = cosine_bump;
          p.chi = chi;
          return gaussian_packet(p);
        },
        py::arg("center"), py::arg("momentum"), py::arg("width") = kPacketWidth, py::arg("curvature") = 0.0,
        py::arg("cosine_bump") = 0.0, py::arg("chi") = Spinor(1, 0, 0, 0));

  // Lagrangian beams
  py::class_<BeamSet>(m, "BeamSet")
      .def_readonly("epsilon", &BeamSet::epsilon)
      .def_readonly("t", &BeamSet::t)
      .def_readonly("dim", &BeamSet::dim)
      .def("__len__", [](const BeamSet& b) { return b.beams.size(); })
      .def("count", &BeamSet::count, py::arg("branch"))
      .def("centers", [](const BeamSet& b) {
        py::array_t<double> out({static_cast<py::ssize_t>(b.beams.size()), static_cast<py::ssize_t>(b.dim)});
        auto a = out.mutable_unchecked<2>();
        for (std::size_t n = 0; n < b.beams.size(); ++n)
          for (int k = 0; k < b.dim; ++k) a(static_cast<py::ssize_t>(n), k) = b.beams[n].y[k];
        return out;
      })
      .def("momenta", [](const BeamSet& b) {
        py::array_t<double> out({static_cast<py::ssize_t>(b.beams.size()), static_cast<py::ssize_t>(b.dim)});
        auto a = out.mutable_unchecked<2>();
        for (std::size_t n = 0; n < b.beams.size(); ++n)
          for (int k = 0; k < b.dim; ++k) a(static_cast<py::ssize_t>(n), k) = b.beams[n].xi[k];
        return out;
      })
      .def("hessians", [](const BeamSet& b) {
        std::vector<Eigen::MatrixXcd> out;
        for (const auto& s : b.beams) out.emplace_back(hessian_of(s));
        return out;
      });
  m.def("beam_mesh", &beam_mesh, py::arg("dim"), py::arg("lo"), py::arg("hi"), py::arg("spacing"));
  m.def("init_beams", [](const InitialData& d, const Grid& y0, double eps, const PotentialModel& pot, double drop) {
    BeamOptions o;
    o.drop_threshold = drop;
    return init_beams(d, y0, eps, pot, o);
  }, py::arg("data"), py::arg("y0_grid"), py::arg("epsilon"), py::arg("potential"), py::arg("drop_threshold") = 1e-8);
  m.def("evolve", [](BeamSet bs, double t, double dt, const PotentialModel& pot, DivergenceMode mode) {
    BeamOptions o;
    o.divergence = mode;
    py::gil_scoped_release release;
    return evolve(std::move(bs), t, dt, pot, o);
  }, py::arg("beams"), py::arg("t_final"), py::arg("dt"), py::arg("potential"),
        py::arg("divergence") = DivergenceMode::Total);
  m.def("default_theta", &default_theta, py::arg("beams"));
  m.def("sum_beams", [](const BeamSet& bs, const Grid& g, std::optional<double> theta) {
    py::gil_scoped_release release;
    return sum_beams(bs, g, theta ? *theta : default_theta(bs));
  }, py::arg("beams"), py::arg("grid"), py::arg("theta") = std::nullopt);

  // Spectral reference
  py::class_<SpectralSolver>(m, "SpectralSolver")
      .def(py::init<const Grid&, double>(), py::arg("grid"), py::arg("epsilon"))
      .def_property_readonly("grid", &SpectralSolver::grid)
      .def("strang_solve", [](const SpectralSolver& s, Field f, double t, double dt, const PotentialModel& pot) {
        py::gil_scoped_release release;
        return s.strang_solve(std::move(f), t, dt, pot);
      }, py::arg("field"), py::arg("t_final"), py::arg("dt"), py::arg("potential"));
  m.def("sample_initial", &sample_initial, py::arg("data"), py::arg("grid"), py::arg("epsilon"));
  m.def("mass", &mass, py::arg("field"));
  m.def("kinetic_multiplier", &kinetic_multiplier, py::arg("xi"), py::arg("dt"), py::arg("epsilon"));
  m.def("potential_multiplier", &potential_multiplier, py::arg("V"), py::arg("A"), py::arg("dt"), py::arg("epsilon"));

  // Eulerian level sets
  py::class_<PhaseSpaceFields>(m, "PhaseSpaceFields")
      .def_readonly("grid", &PhaseSpaceFields::grid)
      .def_readonly("t", &PhaseSpaceFields::t)
      .def_readonly("branch", &PhaseSpaceFields::branch)
      .def_readonly("clamped", &PhaseSpaceFields::clamped)
      .def_readonly("singular", &PhaseSpaceFields::singular)
      .def_property_readonly("S", [](const PhaseSpaceFields& f) { return py::array_t<double>(f.S.size(), f.S.data()); })
      .def_property_readonly("phi", [](const PhaseSpaceFields& f) {
        return py::array_t<Complex>({static_cast<py::ssize_t>(f.size()), static_cast<py::ssize_t>(f.dim)}, f.phi.data());
      })
      .def("hessian", &hessian_from_levelset, py::arg("node"));
  m.def("init_phase_fields", [](const InitialData& d, const Grid& g, Branch b, const PotentialModel& pot) {
    return init_phase_fields(d, g, b, pot);
  }, py::arg("data"), py::arg("grid"), py::arg("branch"), py::arg("potential"));
  m.def("evolve_phase", [](PhaseSpaceFields f, double t, double dt, const PotentialModel& pot, DivergenceMode mode) {
    py::gil_scoped_release release;
    return evolve_phase(std::move(f), t, dt, pot, mode);
  }, py::arg("fields"), py::arg("t_final"), py::arg("dt"), py::arg("potential"),
        py::arg("divergence") = DivergenceMode::Total);
  m.def("reconstruct", [](const PhaseSpaceFields& p, const PhaseSpaceFields& q, const Grid& g, double eps,
                          std::optional<double> theta, double width) {
    ReconstructInfo info;
    Field f = reconstruct(p, q, g, eps, theta, width, &info);
    py::dict d;
    d["active"] = info.active;
    d["near_boundary"] = info.near_boundary;
    d["skipped"] = info.skipped;
    return py::make_tuple(std::move(f), d);
  }, py::arg("plus"), py::arg("minus"), py::arg("grid"), py::arg("epsilon"), py::arg("theta") = std::nullopt,
        py::arg("width_factor") = 2.0);

  // Analysis
  py::class_<ErrorReport>(m, "ErrorReport")
      .def_readonly("epsilon", &ErrorReport::epsilon)
      .def_readonly("l1", &ErrorReport::l1)
      .def_readonly("l2", &ErrorReport::l2)
      .def_readonly("linf", &ErrorReport::linf)
      .def_readonly("linf_rel", &ErrorReport::linf_rel)
      .def_readonly("nodes", &ErrorReport::nodes)
      .def("__repr__", [](const ErrorReport& r) {
        std::ostringstream os;
        os << "<ErrorReport eps=" << r.epsilon << " l1=" << r.l1 << " l2=" << r.l2 << " linf=" << r.linf << ">";
        return os.str();
      });
  m.def("error_norms", &error_norms, py::arg("a"), py::arg("b"), py::arg("scaling") = NormScaling::MeshAverage);
  m.def("convergence_rate", [](const std::vector<std::pair<double, double>>& pairs) {
    const RateFit f = convergence_rate(pairs);
    return py::make_tuple(f.slope, f.intercept, f.residual);
  }, py::arg("pairs"));
  m.def("exact_example1", [](const Grid& g, double t, double eps) { return exact_example1_field(g, t, eps); },
        py::arg("grid"), py::arg("t"), py::arg("epsilon"));

  // I/O
  m.def("write_field_csv", &write_field_csv, py::arg("path"), py::arg("field"));
  m.def("read_field_csv", &read_field_csv, py::arg("path"));
  m.def("write_field_binary", &write_field_binary, py::arg("path"), py::arg("field"));
  m.def("read_field_binary", &read_field_binary, py::arg("path"));
  m.def("read_beams_csv", &read_beams_csv, py::arg("path"));

  // Harness
  m.def("validate_config", [](const std::string& text) {
    validate_config(parse_config(text));
    return serialize_config(parse_config(text));
  }, py::arg("text"), "Parses and validates config text; returns the canonical form.");
  m.def("run_experiment", [](const std::string& text, std::optional<std::string> out_dir) {
    ExperimentConfig c = parse_config(text);
    if (out_dir) c.out_dir = *out_dir;
    ExperimentResult r;
    {
      py::gil_scoped_release release;
      r = run_experiment(c);
    }
    py::list errors;
    for (const auto& e : r.errors) {
      py::dict d;
      d["epsilon"] = e.report.epsilon;
      d["t"] = e.t;
      d["variant"] = e.variant;
      d["l1"] = e.report.l1;
      d["l2"] = e.report.l2;
      d["linf"] = e.report.linf;
      d["linf_rel"] = e.report.linf_rel;
      errors.append(d);
    }
    py::list rates;
    for (const auto& rr : r.rates) {
      py::dict d;
      d["norm"] = rr.norm;
      d["variant"] = rr.variant;
      d["t"] = rr.t;
      d["slope"] = rr.fit.slope;
      rates.append(d);
    }
    py::dict out;
    out["errors"] = errors;
    out["rates"] = rates;
    out["notes"] = r.notes;
    return out;
  }, py::arg("config_text"), py::arg("out_dir") = std::nullopt);
}

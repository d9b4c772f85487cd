#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "klee/commands.hpp"
#include "klee/error.hpp"
#include "klee/geometry.hpp"
#include "klee/io.hpp"
#include "klee/verify.hpp"

namespace py = pybind11;
using namespace klee;

namespace {

VerifyOptions verify_options(int directions, double tol) {
  VerifyOptions opt;
  opt.directions = directions;
  opt.tol = tol;
  return opt;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bodies of revolution with constant maximal-section function";

  static py::exception<Error> error(m, "KleeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.def("unit_ball_volume", &unit_ball_volume, py::arg("n"));
  m.def("sphere_measure", &sphere_measure, py::arg("k"));

  py::class_<BodyRecord>(m, "Body")
      .def_property_readonly("dim", [](const BodyRecord& r) { return r.body.dim; })
      .def_property_readonly("lam", [](const BodyRecord& r) { return r.body.profile.lambda(); })
      .def_property_readonly("mu", [](const BodyRecord& r) { return r.body.profile.mu(); })
      .def_property_readonly("perturbed",
                             [](const BodyRecord& r) { return r.body.perturbation && !r.body.perturbation->is_zero(); })
      .def("profile", [](const BodyRecord& r, double xi) {
        const ProfileValue v = r.body.profile.eval(xi);
        return py::make_tuple(v.f, v.f1, v.f2);
      }, py::arg("xi"), "(f, f', f'') of the generator at xi")
      .def("section_volume", [](const BodyRecord& r, double alpha, int side, double t) {
        return section_volume_by_direction(r.body, alpha, side, t);
      }, py::arg("alpha"), py::arg("side"), py::arg("t"))
      .def("max_section", [](const BodyRecord& r, double alpha, int side) {
        const MaxSection s = max_section(r.body, alpha, side);
        return py::make_tuple(s.t_star, s.vol);
      }, py::arg("alpha"), py::arg("side") = 1, "(t*, M_K) along (side cos alpha, sin alpha, 0, ...)")
      .def("corrupted", [](const BodyRecord& r, double lo, double hi, double amp) {
        BodyRecord out = r;
        out.body.profile = corrupted_profile(r.body.profile, lo, hi, amp);
        return out;
      }, py::arg("lo"), py::arg("hi"), py::arg("amp"))
      .def("to_json", [](const BodyRecord& r) { return body_to_json(r).dump(); })
      .def("report_json", [](const BodyRecord& r) { return r.report.dump(); })
      .def("save", &save_body, py::arg("path"))
      .def("__repr__", [](const BodyRecord& r) {
        return "<Body dim=" + std::to_string(r.body.dim) + " arcs=" + std::to_string(r.body.profile.arcs().size()) + ">";
      });

  m.def("ball", &ball_record, py::arg("dim"));
  m.def("load", &load_body, py::arg("path"));
  m.def("from_json", [](const std::string& s) {
    json j;
    try {
      j = json::parse(s);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, e.what());
    }
    return body_from_json(j);
  }, py::arg("text"));
  m.def("build", [](const std::string& config) {
    BuildConfig cfg;
    apply_config(cfg, json::parse(config));
    py::gil_scoped_release release;
    return build_body(cfg);
  }, py::arg("config_json"));
  m.def("verify_json", [](const BodyRecord& r, int directions, double tol) {
    VerificationReport rep;
    {
      py::gil_scoped_release release;
      rep = verify_body(r.body, verify_options(directions, tol));
    }
    return report_to_json(rep).dump();
  }, py::arg("body"), py::arg("directions") = 200, py::arg("tol") = 1e-5);
  m.def("plot_tables", [](const BodyRecord& r, int directions, int samples) {
    const PlotTables t = plot_tables(r, verify_body(r.body, verify_options(directions, 1e-5)), samples);
    py::dict d;
    d["profile"] = t.profile;
    d["chords"] = t.chords;
    d["radial"] = t.radial;
    d["mk"] = t.mk;
    return d;
  }, py::arg("body"), py::arg("directions") = 200, py::arg("samples") = 401);
}

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cmc/cli.hpp"
#include "cmc/construct.hpp"
#include "cmc/flows.hpp"

namespace py = pybind11;
using namespace cmc;

PYBIND11_MODULE(_cmc, m) {
  m.doc() = "CMC surfaces from loop group factorizations";

  static py::exception<Error> cmc_error(m, "CmcError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = cmc_error;
      py::object inst = exc(e.what());
      inst.attr("code") = e.code();
      PyErr_SetObject(exc.ptr(), inst.ptr());
    }
  });

  py::class_<LoopMatrix>(m, "LoopMatrix")
      .def_readonly("coeffs", &LoopMatrix::coeffs)
      .def_readonly("r", &LoopMatrix::r)
      .def_readonly("N", &LoopMatrix::N)
      .def_readonly("twisted", &LoopMatrix::twisted)
      .def_readonly("tail", &LoopMatrix::tail)
      .def("__call__", &LoopMatrix::eval, py::arg("lam"))
      .def("coeff", &LoopMatrix::coeff)
      .def_static("identity", &LoopMatrix::identity, py::arg("r") = 1.0, py::arg("N") = 32);
  m.def("make_loop", &make_loop, py::arg("coeffs"), py::arg("r"), py::arg("twisted"), py::arg("N") = -1);
  m.def("loop_to_json", [](const LoopMatrix& g) { return loop_to_json(g).dump(); });
  m.def("loop_from_json", [](const std::string& s) { return loop_from_json(json::parse(s)); });

  py::class_<FactorOptions>(m, "FactorOptions")
      .def(py::init<>())
      .def_readwrite("M", &FactorOptions::M)
      .def_readwrite("seed", &FactorOptions::seed)
      .def_readwrite("tol", &FactorOptions::tol);
  py::class_<IwasawaResult>(m, "IwasawaResult")
      .def_readonly("unitary_part", &IwasawaResult::unitary_part)
      .def_readonly("plus_part", &IwasawaResult::plus_part)
      .def_readonly("residual", &IwasawaResult::residual)
      .def_readonly("unitarity", &IwasawaResult::unitarity)
      .def_readonly("method", &IwasawaResult::method);
  m.def("iwasawa", &iwasawa, py::arg("g"), py::arg("opt") = FactorOptions{});
  m.def("cylinder_value", &cylinder_value, py::arg("z"), py::arg("lam"));

  py::class_<ZGrid>(m, "ZGrid")
      .def_static("square", &ZGrid::square, py::arg("nx"), py::arg("ny"), py::arg("extent"))
      .def_readonly("nx", &ZGrid::nx)
      .def_readonly("ny", &ZGrid::ny)
      .def("at", &ZGrid::at)
      .def("size", &ZGrid::size);
  py::class_<FrameGrid>(m, "FrameGrid")
      .def_readonly("grid", &FrameGrid::grid)
      .def_readonly("frames", &FrameGrid::frames)
      .def_readonly("max_unitarity", &FrameGrid::max_unitarity)
      .def_readonly("initial_error", &FrameGrid::initial_error);
  m.def("dress", [](const LoopMatrix& h, const ZGrid& g) { return dress(h, g); }, py::arg("hplus"), py::arg("grid"));
  m.def(
      "surface_vertices",
      [](const FrameGrid& fg, cplx lam) {
        auto mesh = surface_mesh(fg, lam);
        Eigen::MatrixXd v(mesh.vertices.size(), 3);
        for (size_t i = 0; i < mesh.vertices.size(); ++i)
          for (int k = 0; k < 3; ++k) v(Eigen::Index(i), k) = mesh.vertices[i][size_t(k)];
        return v;
      },
      py::arg("frames"), py::arg("lam") = cplx(1.0));
  py::class_<MetricSample>(m, "MetricSample")
      .def_readonly("u", &MetricSample::u)
      .def_readonly("E", &MetricSample::E)
      .def_readonly("off_band", &MetricSample::off_band)
      .def_readonly("reality_gap", &MetricSample::reality_gap)
      .def_readonly("max_residual", &MetricSample::max_residual);
  m.def("extract_metric", [](const FrameGrid& fg) { return extract_metric(fg); });

  py::class_<CurveSpec>(m, "CurveSpec")
      .def_readonly("inner", &CurveSpec::inner)
      .def("genus", &CurveSpec::genus)
      .def("branch_points", &CurveSpec::branch_points);
  m.def("build_curve", &build_curve, py::arg("inner_points"));
  m.def("period_matrix", [](const CurveSpec& s) { return period_matrix(s, build_cycles(s)); });
  m.def("periods_U", [](const CurveSpec& s) {
    auto cs = build_cycles(s);
    auto rep = periods_U(s, cs, build_omega1(s, cs), build_omega2(s, cs));
    return py::make_tuple(rep.U, rep.V);
  });
  m.def("omega1_coeffs", [](const CurveSpec& s) { return build_omega1(s, build_cycles(s)).c; });
  m.def("elliptic_KE", &elliptic_KE, py::arg("k"));
  m.def("genus1_omega1_c0", &genus1_omega1_c0, py::arg("nu1"));

  py::class_<ClosingResult>(m, "ClosingResult")
      .def_readonly("verdict", &ClosingResult::verdict)
      .def_readonly("order", &ClosingResult::order)
      .def_readonly("value", &ClosingResult::value);
  m.def(
      "closing_test", [](const ScalarFn& f, cplx l0, double hw) { return closing_test(f, l0, hw); }, py::arg("beta2"),
      py::arg("lambda0"), py::arg("half_width") = 0.05);

  py::class_<FiniteTypeCertificate>(m, "FiniteTypeCertificate")
      .def_readonly("N", &FiniteTypeCertificate::N)
      .def_readonly("kappa", &FiniteTypeCertificate::kappa)
      .def_readonly("pole_order", &FiniteTypeCertificate::pole_order)
      .def_readonly("flow_residual", &FiniteTypeCertificate::flow_residual)
      .def_readonly("metric_residual", &FiniteTypeCertificate::metric_residual)
      .def_readonly("trivial", &FiniteTypeCertificate::trivial);

  py::class_<ConstructedData>(m, "Family")
      .def_property_readonly("q", [](const ConstructedData& c) { return c.params.q; })
      .def_property_readonly("curve", [](const ConstructedData& c) { return c.params.curve; })
      .def_property_readonly("hplus", [](const ConstructedData& c) { return c.hplus.loop; })
      .def_property_readonly("U", [](const ConstructedData& c) { return c.periods.U; })
      .def_readonly("beta_at_branch", &ConstructedData::beta_at_branch)
      .def(
          "a2", [](const ConstructedData& c, cplx nu) { return c.a2.eval(nu); }, py::arg("nu"))
      .def(
          "certify_finite_type",
          [](const ConstructedData& c, int N, const std::vector<cplx>& zs) {
            return certify_finite_type(c.params.curve, c.sd, c.hplus.loop, N, zs);
          },
          py::arg("N"), py::arg("zs"));
  // family_json: the same document accepted by `cmc construct --family`
  m.def(
      "construct", [](const std::string& family_json) { return assemble_family(family_from_json(json::parse(family_json))); },
      py::arg("family_json"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}

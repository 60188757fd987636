#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mindiag/certify.hpp"
#include "mindiag/io.hpp"
#include "mindiag/optimize.hpp"
#include "mindiag/rank_one.hpp"

namespace py = pybind11;
using namespace mindiag;

namespace {

RealDiagonal diagonal_or_zero(const std::optional<RVector>& x, Eigen::Index n) {
  return x ? RealDiagonal(*x) : RealDiagonal::zero(n);
}

OptimizeParams make_params(int max_iters, double gap_tol, double cluster_tol, const std::string& rule) {
  OptimizeParams p;
  p.max_iters = max_iters;
  p.gap_tol = gap_tol;
  p.cluster_tol = cluster_tol;
  p.step_rule = step_rule_from_string(rule);
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Best diagonal approximants of Hermitian matrices";

  py::register_exception<DegenerateMatrixError>(m, "DegenerateMatrixError", PyExc_ValueError);
  py::register_exception<io::InputError>(m, "InputError", PyExc_ValueError);

  py::class_<MinimalityCertificate>(m, "Certificate")
      .def_property_readonly("verdict", [](const MinimalityCertificate& c) { return to_string(c.verdict); })
      .def_property_readonly("side", [](const MinimalityCertificate& c) { return to_string(c.side); })
      .def_readonly("norm", &MinimalityCertificate::norm)
      .def_readonly("lambda_max", &MinimalityCertificate::lambda_max)
      .def_readonly("lambda_min", &MinimalityCertificate::lambda_min)
      .def_readonly("gap", &MinimalityCertificate::gap)
      .def_readonly("u", &MinimalityCertificate::u)
      .def_readonly("v", &MinimalityCertificate::v)
      .def_property_readonly("top_basis",
                             [](const MinimalityCertificate& c) -> std::optional<CMatrix> {
                               if (!c.qmax) return std::nullopt;
                               return c.qmax->columns;
                             })
      .def_property_readonly("bottom_basis",
                             [](const MinimalityCertificate& c) -> std::optional<CMatrix> {
                               if (!c.qmin) return std::nullopt;
                               return c.qmin->columns;
                             })
      .def_property_readonly("witness",
                             [](const MinimalityCertificate& c) -> std::optional<CMatrix> {
                               if (!c.witness_x) return std::nullopt;
                               return c.witness_x->matrix();
                             })
      .def_readonly("descent_direction", &MinimalityCertificate::descent_direction)
      .def_readonly("descent_slope", &MinimalityCertificate::descent_slope)
      .def_readonly("note", &MinimalityCertificate::note)
      .def("__repr__", [](const MinimalityCertificate& c) {
        return "<Certificate " + std::string(to_string(c.verdict)) + " norm=" + std::to_string(c.norm) + ">";
      });

  py::class_<OptimizeResult>(m, "OptimizeResult")
      .def_property_readonly("x_star", [](const OptimizeResult& r) { return r.x_star.values(); })
      .def_readonly("phi_star", &OptimizeResult::phi_star)
      .def_readonly("iterations", &OptimizeResult::iterations)
      .def_readonly("method", &OptimizeResult::method)
      .def_readonly("start_index", &OptimizeResult::start_index)
      .def_readonly("certificate", &OptimizeResult::certificate)
      .def_property_readonly("verdict", [](const OptimizeResult& r) { return to_string(r.certificate.verdict); })
      .def_property_readonly("trace",
                             [](const OptimizeResult& r) {
                               std::vector<std::pair<int, double>> out;
                               for (const auto& t : r.trace) out.emplace_back(t.iteration, t.phi);
                               return out;
                             })
      .def("__repr__", [](const OptimizeResult& r) {
        return "<OptimizeResult phi_star=" + std::to_string(r.phi_star) + " " +
               to_string(r.certificate.verdict) + " via " + r.method + ">";
      });

  py::class_<RankOneSolution>(m, "RankOneSolution")
      .def_property_readonly("diagonal", [](const RankOneSolution& s) { return s.diagonal.values(); })
      .def_readonly("minimal_norm", &RankOneSolution::minimal_norm)
      .def_property_readonly("case", [](const RankOneSolution& s) { return to_string(s.case_tag); })
      .def_readonly("unique", &RankOneSolution::unique)
      .def_property_readonly("big_index", [](const RankOneSolution& s) -> std::optional<Eigen::Index> {
        if (s.big_index < 0) return std::nullopt;
        return s.big_index;
      });

  m.def(
      "minimize",
      [](const CMatrix& a, int starts, std::uint64_t seed, int max_iters, double gap_tol, double cluster_tol,
         const std::string& step_rule) {
        const HermitianMatrix a0(a);
        const OptimizeParams p = make_params(max_iters, gap_tol, cluster_tol, step_rule);
        py::gil_scoped_release release;
        return dispatch(a0, p, starts, seed);
      },
      py::arg("a"), py::kw_only(), py::arg("starts") = 1, py::arg("seed") = 0,
      py::arg("max_iters") = OptimizeParams{}.max_iters, py::arg("gap_tol") = OptimizeParams{}.gap_tol,
      py::arg("cluster_tol") = kDefaultClusterTol, py::arg("step_rule") = "quasi_newton",
      "Minimize ||A + Diag(x)|| over real x and certify the result.");

  m.def(
      "minimize_from",
      [](const CMatrix& a, const RVector& x0, int max_iters, double gap_tol, double cluster_tol,
         const std::string& step_rule) {
        const HermitianMatrix a0(a);
        const OptimizeParams p = make_params(max_iters, gap_tol, cluster_tol, step_rule);
        py::gil_scoped_release release;
        return minimize_sup_norm(a0, RealDiagonal(x0), p);
      },
      py::arg("a"), py::arg("x0"), py::kw_only(), py::arg("max_iters") = OptimizeParams{}.max_iters,
      py::arg("gap_tol") = OptimizeParams{}.gap_tol, py::arg("cluster_tol") = kDefaultClusterTol,
      py::arg("step_rule") = "quasi_newton", "Single run from x0, no closed forms.");

  m.def(
      "certify",
      [](const CMatrix& a, const std::optional<RVector>& x, double gap_tol, double cluster_tol) {
        const HermitianMatrix a0(a);
        OptimizeParams p;
        p.gap_tol = gap_tol;
        p.cluster_tol = cluster_tol;
        return certify_result(a0, diagonal_or_zero(x, a0.dim()), p);
      },
      py::arg("a"), py::arg("x") = py::none(), py::kw_only(), py::arg("gap_tol") = OptimizeParams{}.gap_tol,
      py::arg("cluster_tol") = kDefaultClusterTol, "Decide whether A + Diag(x) is minimal.");

  m.def(
      "spectral_norm", [](const CMatrix& a) { return spectral_norm(HermitianMatrix(a)); }, py::arg("a"));

  m.def(
      "minimizing_diagonal", [](const CVector& h) { return minimizing_diagonal(UnitVector(h, 1e-8)); },
      py::arg("h"), "Closed-form minimizing diagonal of h h^* for a unit vector h.");

  m.def(
      "closed_polygon_angles", [](const RVector& lengths) {
        return closed_polygon_angles({lengths.data(), static_cast<std::size_t>(lengths.size())});
      },
      py::arg("lengths"));

  m.def(
      "orthogonal_partner", [](const CVector& h) { return orthogonal_partner(UnitVector(h, 1e-8)).values(); },
      py::arg("h"));

  m.def(
      "export_sdpa",
      [](const CMatrix& a, const std::vector<std::string>& comments) {
        return io::write_sdpa(io::sdpa_from_problem(HermitianMatrix(a)), comments);
      },
      py::arg("a"), py::arg("comments") = std::vector<std::string>{},
      "SDPA sparse text of min w s.t. -wI <= A + Diag(x) <= wI, over the real embedding.");
}

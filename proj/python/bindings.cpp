#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ordino/errors.hpp"
#include "ordino/estimation.hpp"
#include "ordino/gaussian.hpp"
#include "ordino/harness.hpp"
#include "ordino/io.hpp"
#include "ordino/likelihood.hpp"
#include "ordino/mrc.hpp"

namespace py = pybind11;
using namespace ordino;

namespace {

// Documents cross the boundary as JSON text; the Python side decodes them.
py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
Json from_py(const py::object& o) { return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>()); }

Dataset make_dataset(std::vector<int> y1, std::vector<int> y2, const RowMatrix& X1, const RowMatrix& X2) {
    Dataset d;
    d.y1 = std::move(y1);
    d.y2 = std::move(y2);
    d.X1 = X1;
    d.X2 = X2;
    return d;
}

py::dict dataset_dict(const Dataset& d) {
    py::dict out;
    out["y1"] = d.y1;
    out["y2"] = d.y2;
    out["X1"] = d.X1;
    out["X2"] = d.X2;
    return out;
}

}  // namespace

PYBIND11_MODULE(_ordino, m) {
    m.doc() = "Bivariate ordered probit with non-lattice thresholds";

    py::register_exception<UserError>(m, "UserError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("bvn_cdf", [](double a, double b, double rho) { return bvn_cdf({a, b, rho}); }, py::arg("a"), py::arg("b"), py::arg("rho"));

    m.def(
        "design",
        [](const std::string& name) {
            const auto d = design_by_name(name);
            py::dict out;
            out["spec"] = to_py(spec_to_json(spec_for_design(d)));
            out["params"] = to_py(params_to_json(d.params()));
            return out;
        },
        py::arg("name"));

    m.def(
        "simulate",
        [](const std::string& name, std::size_t n, std::uint64_t seed) {
            Dataset d;
            {
                py::gil_scoped_release release;
                d = simulate(design_by_name(name), n, seed);
            }
            return dataset_dict(d);
        },
        py::arg("design"), py::arg("n"), py::arg("seed") = 1);

    m.def(
        "fit",
        [](std::vector<int> y1, std::vector<int> y2, const RowMatrix& X1, const RowMatrix& X2, std::pair<int, int> M,
           const std::string& model, int multistart, std::uint64_t seed, double lam, int workers) {
            const auto data = make_dataset(std::move(y1), std::move(y2), X1, X2);
            FitConfig c;
            c.multistart_count = multistart;
            c.seed = seed;
            c.lambda = lam;
            c.workers = workers;
            EstimationResult r;
            {
                py::gil_scoped_release release;
                r = fit(parse_model_kind(model), data, {M.first, M.second}, data.k1(), data.k2(), c);
            }
            return to_py(result_to_json(r, c));
        },
        py::arg("y1"), py::arg("y2"), py::arg("X1"), py::arg("X2"), py::arg("M"), py::arg("model") = "nonlattice",
        py::arg("multistart") = 64, py::arg("seed") = 1, py::arg("lam") = -1.0, py::arg("workers") = 0);

    m.def(
        "cell_probabilities",
        [](const py::object& params, const std::vector<double>& x1, const std::vector<double>& x2) {
            return Eigen::MatrixXd(cell_prob_matrix(params_from_json(from_py(params)), x1, x2));
        },
        py::arg("params"), py::arg("x1"), py::arg("x2"));

    m.def(
        "loglik",
        [](const py::object& params, std::vector<int> y1, std::vector<int> y2, const RowMatrix& X1, const RowMatrix& X2) {
            return loglik(params_from_json(from_py(params)), make_dataset(std::move(y1), std::move(y2), X1, X2));
        },
        py::arg("params"), py::arg("y1"), py::arg("y2"), py::arg("X1"), py::arg("X2"));

    m.def(
        "is_coherent",
        [](const py::object& structure) { return is_coherent(structure_from_json(from_py(structure))).coherent; },
        py::arg("structure"));

    m.def(
        "hierarchy",
        [](const py::object& structure) -> py::object {
            const auto tree = detect_hierarchy(structure_from_json(from_py(structure)));
            if (!tree) return py::none();
            return py::str(render_tree(*tree));
        },
        py::arg("structure"));

    m.def(
        "mrc",
        [](std::vector<int> y1, std::vector<int> y2, const RowMatrix& X1, const RowMatrix& X2, std::vector<int> exclusive, int dim,
           std::vector<double> bandwidth, int workers) {
            const auto data = make_dataset(std::move(y1), std::move(y2), X1, X2);
            MrcConfig c;
            c.dim = dim;
            c.exclusive = std::move(exclusive);
            c.bandwidth = std::move(bandwidth);
            c.workers = workers;
            MrcResult r;
            {
                py::gil_scoped_release release;
                r = fit_mrc(data, c);
            }
            return to_py(mrc_result_to_json(r, c));
        },
        py::arg("y1"), py::arg("y2"), py::arg("X1"), py::arg("X2"), py::arg("exclusive"), py::arg("dim") = 1,
        py::arg("bandwidth") = std::vector<double>{}, py::arg("workers") = 0);
}

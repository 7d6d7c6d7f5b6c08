#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rtail/asymptotics.hpp"
#include "rtail/config.hpp"
#include "rtail/cramer.hpp"
#include "rtail/dist.hpp"
#include "rtail/error.hpp"
#include "rtail/restart.hpp"
#include "rtail/run.hpp"

namespace py = pybind11;
using namespace rtail;

namespace {

py::dict to_dict(const TailEstimate& e)
{
    py::dict d;
    d["x"] = e.x;
    d["point"] = e.point;
    d["stderr"] = e.std_error;
    d["lower"] = e.lower;
    d["upper"] = e.upper;
    d["n"] = e.n_used;
    d["truncation"] = e.truncation;
    return d;
}

py::list table_records(const Table& t)
{
    py::list out;
    for (const auto& row : t.rows) {
        py::dict rec;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!row[i])
                rec[py::str(t.columns[i])] = py::none();
            else
                std::visit([&](const auto& v) { rec[py::str(t.columns[i])] = v; }, *row[i]);
        }
        out.append(rec);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Tail of the total completion time under RESTART failures";
    m.attr("__version__") = std::string(version());

    static py::exception<Error> error(m, "RtailError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            error(e.what());
        }
    });

    py::class_<DistributionSpec>(m, "Distribution")
        .def(py::init([](const std::string& text) { return parse_distribution(text); }),
             py::arg("text"))
        .def("density", [](const DistributionSpec& d, double t) { return density(d, t); })
        .def("cdf", [](const DistributionSpec& d, double t) { return cdf(d, t); })
        .def("tail", [](const DistributionSpec& d, double t) { return tail(d, t); })
        .def("quantile", [](const DistributionSpec& d, double p) { return quantile(d, p); })
        .def("mean", [](const DistributionSpec& d) { return mean(d); })
        .def_property_readonly("name", [](const DistributionSpec& d) { return std::string(d.name()); })
        .def("__eq__", [](const DistributionSpec& a, const DistributionSpec& b) { return a == b; })
        .def("__str__", [](const DistributionSpec& d) { return to_string(d); })
        .def("__repr__", [](const DistributionSpec& d) { return "Distribution('" + to_string(d) + "')"; });

    m.def(
        "lundberg_root",
        [](const DistributionSpec& G, double t) {
            auto s = lundberg_root(G, t);
            py::dict d;
            d["t"] = s.t;
            d["gamma"] = s.gamma;
            d["B"] = s.B;
            d["C"] = s.C;
            d["residual"] = s.residual;
            return d;
        },
        py::arg("G"), py::arg("t"));

    m.def(
        "semi_analytic_tail",
        [](const DistributionSpec& F, const DistributionSpec& G, double x, double rel_tol,
           double trunc_eps) {
            QuadratureParams q;
            q.rel_tol = rel_tol;
            q.trunc_eps = trunc_eps;
            TailEstimate e;
            {
                py::gil_scoped_release release;
                e = semi_analytic_tail(F, G, x, q);
            }
            return to_dict(e);
        },
        py::arg("F"), py::arg("G"), py::arg("x"), py::arg("rel_tol") = 1e-10,
        py::arg("trunc_eps") = 1e-12);

    m.def(
        "importance_tail",
        [](const DistributionSpec& F, const DistributionSpec& G, double x, std::uint64_t n,
           std::uint64_t seed, unsigned workers) {
            TailEstimate e;
            {
                py::gil_scoped_release release;
                e = importance_tail(F, G, x, n, RngStream(seed), workers);
            }
            return to_dict(e);
        },
        py::arg("F"), py::arg("G"), py::arg("x"), py::arg("n"), py::arg("seed"),
        py::arg("workers") = 1);

    m.def(
        "classify",
        [](const DistributionSpec& F, const DistributionSpec& G) {
            auto rc = classify(F, G);
            py::dict d;
            d["case"] = std::string(to_string(rc.kind));
            d["mode"] = std::string(to_string(rc.mode));
            d["theta"] = rc.theta;
            d["constants"] = rc.constants;
            return d;
        },
        py::arg("F"), py::arg("G"));

    m.def(
        "asymptote",
        [](const DistributionSpec& F, const DistributionSpec& G, double x) {
            return evaluate_asymptote(classify(F, G), x);
        },
        py::arg("F"), py::arg("G"), py::arg("x"));

    m.def(
        "moment_classify",
        [](const DistributionSpec& F, const DistributionSpec& G, double alpha) {
            return std::string(to_string(moment_classify(F, G, alpha).verdict));
        },
        py::arg("F"), py::arg("G"), py::arg("alpha"));

    m.def("n_pmf_diagonal", &n_pmf_diagonal, py::arg("n"));

    m.def(
        "run",
        [](const std::string& config_text) {
            auto cfg = parse_config(config_text);
            Table t;
            {
                py::gil_scoped_release release;
                t = execute(cfg);
            }
            return table_records(t);
        },
        py::arg("config_text"), "Runs a config and returns its records as a list of dicts.");

    m.def(
        "run_csv",
        [](const std::string& config_text) {
            auto cfg = parse_config(config_text);
            std::ostringstream out;
            {
                py::gil_scoped_release release;
                write_csv(cfg, execute(cfg), out);
            }
            return out.str();
        },
        py::arg("config_text"), "Runs a config and returns the CSV output.");
}

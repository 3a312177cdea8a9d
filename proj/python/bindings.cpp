#include "lobhawkes/acceptance.hpp"
#include "lobhawkes/error.hpp"
#include "lobhawkes/estimate.hpp"
#include "lobhawkes/events.hpp"
#include "lobhawkes/io.hpp"
#include "lobhawkes/model.hpp"
#include "lobhawkes/simulate.hpp"
#include "lobhawkes/whsolve.hpp"

#include "json.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace lobhawkes;

namespace {

HawkesModel model_of(const py::object& obj) {
    if (py::isinstance<py::str>(obj)) return HawkesModel::from_json(nlohmann::json::parse(obj.cast<std::string>()));
    const auto dumps = py::module_::import("json").attr("dumps");
    return HawkesModel::from_json(nlohmann::json::parse(dumps(obj).cast<std::string>()));
}

py::object to_python(const nlohmann::json& doc) {
    return py::module_::import("json").attr("loads")(doc.dump());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Nonparametric multivariate Hawkes estimation";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<InstabilityError>(m, "InstabilityError", PyExc_ValueError);
    py::register_exception<IllConditionedError>(m, "IllConditionedError", PyExc_ArithmeticError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::class_<Session>(m, "Session")
        .def(py::init<std::string, double, std::size_t>(), py::arg("id"), py::arg("duration"), py::arg("dimension"))
        .def_readwrite("id", &Session::id)
        .def_readwrite("duration", &Session::duration)
        .def_readwrite("times", &Session::times)
        .def("count", &Session::count);

    py::class_<MultivariateEventStream>(m, "EventStream")
        .def(py::init<std::size_t>(), py::arg("dimension"))
        .def_readwrite("sessions", &MultivariateEventStream::sessions)
        .def_readonly("dimension", &MultivariateEventStream::dimension)
        .def("count", &MultivariateEventStream::count)
        .def("total_time", &MultivariateEventStream::total_time)
        .def("validate", &MultivariateEventStream::validate);

    py::class_<LinLogParams>(m, "LinLogParams")
        .def(py::init<>())
        .def_readwrite("h_min", &LinLogParams::h_min)
        .def_readwrite("h_max", &LinLogParams::h_max)
        .def_readwrite("n_lin", &LinLogParams::n_lin)
        .def_readwrite("n_log", &LinLogParams::n_log);

    py::class_<LinLogGrid>(m, "LinLogGrid")
        .def_readonly("edges", &LinLogGrid::edges)
        .def("bins", &LinLogGrid::bins)
        .def("bin_of", &LinLogGrid::bin_of);
    m.def("build_linlog_grid", &build_linlog_grid, py::arg("params") = LinLogParams{});

    py::class_<QuadratureParams>(m, "QuadratureParams")
        .def(py::init<>())
        .def_readwrite("x_min", &QuadratureParams::x_min)
        .def_readwrite("x_max", &QuadratureParams::x_max)
        .def_readwrite("n_lin", &QuadratureParams::n_lin)
        .def_readwrite("n_log", &QuadratureParams::n_log);

    py::class_<QuadratureGrid>(m, "QuadratureGrid")
        .def_readonly("nodes", &QuadratureGrid::nodes)
        .def_readonly("weights", &QuadratureGrid::weights)
        .def("size", &QuadratureGrid::size);
    m.def("build_quadrature", &build_quadrature, py::arg("params") = QuadratureParams{});

    py::class_<SimulationResult>(m, "SimulationResult")
        .def_readonly("stream", &SimulationResult::stream)
        .def_readonly("burn_in", &SimulationResult::burn_in)
        .def_readonly("model_hash", &SimulationResult::model_hash)
        .def_readonly("clipping_frequency", &SimulationResult::clipping_frequency)
        .def("metadata", [](const SimulationResult& r) { return to_python(r.metadata()); });

    m.def(
        "simulate",
        [](const py::object& model, double horizon, std::uint64_t seed, std::optional<double> burn_in) {
            SimulationOptions o;
            o.horizon = horizon;
            o.seed = seed;
            o.burn_in = burn_in;
            const auto hm = model_of(model);
            py::gil_scoped_release release;
            return simulate(hm, o);
        },
        py::arg("model"), py::arg("horizon"), py::arg("seed") = 0, py::arg("burn_in") = py::none(),
        "Simulate a model given as a JSON string or a dict");
    m.def("mean_intensity", [](const py::object& model) { return Eigen::VectorXd(mean_intensity(model_of(model))); });

    py::class_<ConditionalLawMatrix>(m, "ConditionalLaw")
        .def_readonly("grid", &ConditionalLawMatrix::grid)
        .def_readonly("dimension", &ConditionalLawMatrix::dimension)
        .def_readonly("lambda_", &ConditionalLawMatrix::lambda)
        .def("values", [](const ConditionalLawMatrix& c, std::size_t i, std::size_t j) { return c.values.at(c.index(i, j)); })
        .def("stderrs", [](const ConditionalLawMatrix& c, std::size_t i, std::size_t j) { return c.stderrs.at(c.index(i, j)); })
        .def("at", &ConditionalLawMatrix::at);
    m.def(
        "estimate_conditional_law",
        [](const MultivariateEventStream& stream, const LinLogGrid& grid, bool equal_weights, unsigned threads) {
            ConditionalLawOptions o;
            o.equal_session_weights = equal_weights;
            o.threads = threads;
            py::gil_scoped_release release;
            return estimate_conditional_law(stream, grid, o);
        },
        py::arg("stream"), py::arg("grid"), py::arg("equal_session_weights") = false, py::arg("threads") = 1);

    py::class_<SolverDiagnostics>(m, "SolverDiagnostics")
        .def_readonly("residual", &SolverDiagnostics::residual)
        .def_readonly("condition", &SolverDiagnostics::condition)
        .def_readonly("unknowns", &SolverDiagnostics::unknowns);

    py::class_<KernelEstimate>(m, "KernelEstimate")
        .def_readonly("quad", &KernelEstimate::quad)
        .def_readonly("dimension", &KernelEstimate::dimension)
        .def_readonly("norms", &KernelEstimate::norms)
        .def_readonly("rescaled", &KernelEstimate::rescaled)
        .def_readonly("lambda_", &KernelEstimate::lambda)
        .def_readonly("mu", &KernelEstimate::mu)
        .def_readonly("ratios", &KernelEstimate::ratios)
        .def_readonly("diagnostics", &KernelEstimate::diagnostics)
        .def("kernel", &KernelEstimate::kernel)
        .def("stderr", [](const KernelEstimate& e, std::size_t i, std::size_t j) { return e.stderrs.at(e.index(i, j)); });
    m.def(
        "solve_wiener_hopf",
        [](const ConditionalLawMatrix& claw, const QuadratureGrid& quad) {
            py::gil_scoped_release release;
            return solve_wiener_hopf(claw, quad);
        },
        py::arg("claw"), py::arg("quad"));

    m.def("load_event_sessions",
          [](const std::vector<std::filesystem::path>& files, const std::string& scheme) {
              return load_event_sessions(files, BinningScheme::from_json(nlohmann::json::parse(scheme)));
          },
          py::arg("files"), py::arg("scheme_json"));
    m.def("write_kernel_estimate", &write_kernel_estimate, py::arg("estimate"), py::arg("dir"), py::arg("labels") = std::vector<std::string>{});
    m.def("read_kernel_estimate", &read_kernel_estimate, py::arg("dir"));
    m.def("randomize_timestamps",
          [](const MultivariateEventStream& s, double round_us, double jitter_us, std::uint64_t seed) {
              return randomize_timestamps(s, round_us, jitter_us, seed);
          },
          py::arg("stream"), py::arg("round_us") = 10.0, py::arg("jitter_us") = 50.0, py::arg("seed") = 0);

    m.def(
        "run_acceptance",
        [](std::vector<int> only, std::uint64_t seed, double scale) {
            AcceptanceOptions o;
            o.only = std::move(only);
            o.seed = seed;
            o.tolerance_scale = scale;
            py::gil_scoped_release release;
            return run_acceptance(o).to_json().dump();
        },
        py::arg("only"), py::arg("seed") = 20120101, py::arg("tolerance_scale") = 1.0,
        "Run acceptance criteria; returns the report as a JSON string");
}

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qgraph/carleman.hpp"
#include "qgraph/config.hpp"
#include "qgraph/evolution.hpp"
#include "qgraph/reduction.hpp"
#include "qgraph/runner.hpp"
#include "qgraph/transfer.hpp"
#include "qgraph/uncertainty.hpp"

namespace py = pybind11;
using namespace qgraph;

namespace {

EvolutionConfig evolution_config(double dt, bool guard) {
    EvolutionConfig c;
    c.dt = dt;
    c.guard_boundary = guard;
    return c;
}

// star with identical data on every edge; returns one LineSamples per edge
std::vector<LineSamples> evolve_star(int N, double L, double h, const std::function<cplx(double)>& u0, double t,
                                     double dt, bool guard) {
    auto g = build_star(N, L, h);
    GraphState s = sample_state(g, [&](std::size_t, double x) { return u0(x); });
    GraphState r = [&] {
        py::gil_scoped_release free;
        return evolve_graph(s, t, evolution_config(dt, guard));
    }();
    std::vector<LineSamples> out;
    for (std::size_t e = 0; e < r.values.size(); ++e) out.push_back(edge_samples(r, e));
    return out;
}

LineSamples evolve_sigma(const std::vector<double>& a, double l, double L, double h,
                         const std::function<cplx(double)>& u0, double t, double dt) {
    PiecewiseCoefficient sigma(a, l);
    LineMedium m = line_medium(sigma, L, h);
    LineSamples s0 = sample_line(m.x, u0);
    py::gil_scoped_release free;
    return evolve_line_sigma(s0, sigma, t, evolution_config(dt, false));
}

}  // namespace

PYBIND11_MODULE(_qgraph, m) {
    m.doc() = "Schroedinger evolution on metric graphs";

    py::register_exception<NumericalGuard>(m, "NumericalGuard", PyExc_ArithmeticError);

    py::class_<LineSamples>(m, "LineSamples")
        .def(py::init<>())
        .def_readwrite("x", &LineSamples::x)
        .def_readwrite("u", &LineSamples::u)
        .def_readwrite("time", &LineSamples::time)
        .def("__len__", &LineSamples::size);
    m.def("l2_norm", &l2_norm);
    m.def("relative_l2_error", &relative_l2_error);
    m.def("sample_line", &sample_line, py::arg("x"), py::arg("f"), py::arg("time") = 0.0);

    m.def("evolve_star", &evolve_star, py::arg("N"), py::arg("L"), py::arg("h"), py::arg("u0"), py::arg("t"),
          py::arg("dt") = 1e-3, py::arg("guard") = false);
    m.def("evolve_line_sigma", &evolve_sigma, py::arg("a"), py::arg("l"), py::arg("L"), py::arg("h"), py::arg("u0"),
          py::arg("t"), py::arg("dt") = 1e-3);

    py::class_<WienerSeries>(m, "WienerSeries")
        .def_readonly("K", &WienerSeries::K)
        .def_readonly("rho", &WienerSeries::rho)
        .def_readonly("tail_bound", &WienerSeries::tail_bound)
        .def("__call__", &WienerSeries::operator());
    m.def("invert_E", [](const std::vector<double>& a, double l, int K, std::size_t points) {
        LayerParams p = layer_params(a, l);
        auto grid = default_xi_grid(p, points);
        WienerSeries s = invert_E(p, K, grid);
        return py::make_tuple(s, wiener_residual(s, p, grid));
    }, py::arg("a"), py::arg("l"), py::arg("K") = 20, py::arg("points") = 2048,
       "Truncated inverse of conj(E_{N-1,1}) and its residual on the grid.");
    m.def("determinant_product", [](const std::vector<double>& a, double l) {
        LayerParams p = layer_params(a, l);
        return determinant_product(p.N() - 1, 1, p);
    });
    m.def("free_kernel", &free_kernel);

    py::class_<ReductionMap>(m, "ReductionMap")
        .def_readonly("folded", &ReductionMap::folded)
        .def_readonly("slope", &ReductionMap::slope)
        .def_readonly("b", &ReductionMap::b)
        .def_readonly("sigma", &ReductionMap::sigma)
        .def("__call__", &ReductionMap::map);
    m.def("reduction_map", [](const std::vector<double>& lengths, const std::vector<int>& degrees) {
        return reduction_map(TreeMetadata{lengths, degrees});
    });

    py::class_<SharpExample>(m, "SharpExample")
        .def_readonly("alpha", &SharpExample::alpha)
        .def_readonly("beta", &SharpExample::beta)
        .def("u0", [](const SharpExample& e, double x) { return e.u0(x); })
        .def("u1", [](const SharpExample& e, double x) { return e.u1(x); });
    m.def("sharp_example_star", &sharp_example_star, py::arg("alpha"), py::arg("N") = 3);
    m.def("sharp_example_two_step", &sharp_example_two_step);
    m.def("gamma_Gamma", &gamma_Gamma);
    m.def("fit_decay", [](const LineSamples& f, const std::string& side, double lo, double hi) {
        Side s = side == "negative" ? Side::negative : side == "positive" ? Side::positive : Side::both;
        return fit_gaussian_decay(f, s, lo, hi).rate;
    }, py::arg("f"), py::arg("side"), py::arg("lo"), py::arg("hi"));

    m.def("alpha_vectors", [](int N) {
        AlphaVectors av = alpha_vectors(N);
        std::vector<std::vector<double>> v(N, std::vector<double>(N));
        for (int k = 0; k < N; ++k)
            for (int j = 0; j < N; ++j) v[k][j] = av.value(k, j);
        return py::make_tuple(v, check_alpha_invariants(av).all());
    });
    py::class_<CarlemanSides>(m, "CarlemanSides")
        .def_readonly("lhs", &CarlemanSides::lhs)
        .def_readonly("rhs", &CarlemanSides::rhs)
        .def_readonly("margin", &CarlemanSides::margin)
        .def_readonly("error_estimate", &CarlemanSides::error_estimate);
    m.def("carleman_sides", [](int N, std::uint64_t seed, double mu, double eps, double R, int t_nodes, int x_nodes) {
        py::gil_scoped_release free;
        return carleman_sides(sample_zcomp(N, seed), WeightParams{mu, eps, R}, alpha_vectors(N), t_nodes, x_nodes);
    }, py::arg("N"), py::arg("seed"), py::arg("mu"), py::arg("eps"), py::arg("R"), py::arg("t_nodes") = 201,
       py::arg("x_nodes") = 401);

    m.def("run_config", [](const std::string& text, const std::string& out, bool verify) {
        std::vector<ExperimentConfig> cfgs = parse_experiments(text);
        RunOptions opt;
        opt.out = out;
        opt.verify = verify;
        opt.plots = false;
        py::gil_scoped_release free;
        int rc = kExitOk;
        for (const auto& r : run_jobs(cfgs, opt, 1)) rc = std::max(rc, r.exit_code);
        return rc;
    }, py::arg("config"), py::arg("out"), py::arg("verify") = false,
       "Run a JSON experiment config; returns the process exit code the CLI would give.");
}

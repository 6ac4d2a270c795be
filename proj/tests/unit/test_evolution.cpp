#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qgraph/evolution.hpp"

using namespace qgraph;

namespace {

GraphState gaussian_star(int N, double L, double h, double b = 1.0) {
    auto g = build_star(N, L, h);
    return sample_state(g, [b](std::size_t, double x) { return cplx(std::exp(-b * x * x)); });
}

double total_mass(const GraphState& s) {
    double m = 0.0;
    for (std::size_t e = 0; e < s.values.size(); ++e) {
        LineSamples f;
        for (std::size_t i = 0; i < s.values[e].size(); ++i) f.x.push_back(s.grid.coordinate(e, i));
        f.u = s.values[e];
        m += std::pow(l2_norm(f), 2);
    }
    return std::sqrt(m);
}

// max over all edges of |u - free Gaussian| on x <= xmax
double star_error(const GraphState& s, double t, double xmax) {
    double err = 0.0;
    for (std::size_t e = 0; e < s.values.size(); ++e)
        for (std::size_t i = 0; i < s.values[e].size(); ++i) {
            double x = s.grid.coordinate(e, i);
            if (x > xmax) break;
            err = std::max(err, std::abs(s.values[e][i] - oracle::free_gaussian(1.0, t, x)));
        }
    return err;
}

}  // namespace

TEST_CASE("zero time returns the input") {
    auto s = gaussian_star(3, 20.0, 0.05);
    auto r = evolve_graph(s, 0.0, {});
    for (std::size_t e = 0; e < 3; ++e) CHECK(r.values[e] == s.values[e]);
}

TEST_CASE("mass is conserved") {
    auto s = gaussian_star(3, 40.0, 0.05);
    EvolutionConfig cfg;
    cfg.dt = 1e-3;
    auto r = evolve_graph(s, 1.0, cfg);
    CHECK(std::abs(total_mass(r) - total_mass(s)) < 1e-10 * total_mass(s));
    CHECK(r.time == doctest::Approx(1.0));
}

TEST_CASE("symmetric star data follows the free line") {
    // identical even components satisfy Kirchhoff for all time and evolve like the line
    auto s = gaussian_star(3, 40.0, 0.01);
    EvolutionConfig cfg;
    cfg.dt = 5e-4;
    auto r = evolve_graph(s, 1.0, cfg);
    CHECK(star_error(r, 1.0, 10.0) < 1e-4);
    auto k = kirchhoff_residual(r);
    CHECK(k.continuity < 1e-12);
}

TEST_CASE("second order convergence") {
    double errs[2];
    int i = 0;
    for (double h : {0.04, 0.02}) {
        auto s = gaussian_star(2, 40.0, h);
        EvolutionConfig cfg;
        cfg.dt = h / 4.0;
        errs[i++] = star_error(evolve_graph(s, 0.5, cfg), 0.5, 8.0);
    }
    double ratio = errs[0] / errs[1];
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("time reversibility") {
    auto g = build_star(3, 30.0, 0.05);
    auto s = sample_state(g, [](std::size_t e, double x) {
        return std::exp(-x * x) * cplx(1.0 + 0.3 * std::sin(oracle::pi * x) * std::sin(oracle::pi * x) * (e + 1),
                                       0.1 * x);
    });
    EvolutionConfig fwd, back;
    fwd.dt = 1e-3;
    back.dt = 1e-3;
    auto r = evolve_graph(s, 0.5, fwd);
    for (auto& v : r.values)
        for (auto& z : v) z = std::conj(z);
    auto b = evolve_graph(r, 0.5, back);
    double err = 0.0;
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t i = 0; i < s.values[e].size(); ++i)
            err = std::max(err, std::abs(std::conj(b.values[e][i]) - s.values[e][i]));
    CHECK(err < 1e-9);
}

TEST_CASE("constant potential is a phase") {
    auto s = gaussian_star(3, 30.0, 0.05);
    EvolutionConfig cfg;
    cfg.dt = 1e-3;
    const double c = 0.7, t = 0.5;
    auto free = evolve_graph(s, t, cfg);
    auto pot = evolve_graph_potential(s, [c](std::size_t, double) { return c; }, {}, t, cfg);
    double err = 0.0;
    cplx phase = std::exp(cplx(0.0, c * t));
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t i = 0; i < s.values[e].size(); ++i)
            err = std::max(err, std::abs(pot.values[e][i] - phase * free.values[e][i]));
    CHECK(err < 1e-10);

    auto none = evolve_graph_potential(s, {}, {}, t, cfg);
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t i = 0; i < s.values[e].size(); ++i) CHECK(std::abs(none.values[e][i] - free.values[e][i]) < 1e-13);
}

TEST_CASE("imaginary potential damps") {
    auto s = gaussian_star(3, 30.0, 0.05);
    EvolutionConfig cfg;
    cfg.dt = 1e-3;
    const double m = 0.8, t = 0.5;
    auto r = evolve_graph_potential(s, {}, [m](std::size_t, double, double) { return cplx(0.0, m); }, t, cfg);
    CHECK(total_mass(r) / total_mass(s) == doctest::Approx(std::exp(-m * t)).epsilon(1e-6));
}

TEST_CASE("constant coefficient line") {
    PiecewiseCoefficient sigma({1.0}, 0.0);
    auto m = line_medium(sigma, 30.0, 0.01);
    CHECK(m.x.front() == doctest::Approx(-30.0));
    CHECK(m.x.back() == doctest::Approx(30.0));
    auto u0 = sample_line(m.x, [](double x) { return cplx(std::exp(-x * x)); });
    EvolutionConfig cfg;
    cfg.dt = 5e-4;
    auto r = evolve_line_sigma(u0, sigma, 1.0, cfg);
    auto exact = sample_line(m.x, [](double x) { return oracle::free_gaussian(1.0, 1.0, x); }, 1.0);
    CHECK(relative_l2_error(restrict_to(r, -10, 10), restrict_to(exact, -10, 10)) < 1e-4);
}

TEST_CASE("layered line conserves mass") {
    PiecewiseCoefficient sigma({1.0, 2.0}, 1.0);
    CHECK(sigma.sigma(2) == doctest::Approx(0.25));
    CHECK(sigma.piece_of(-0.5) == 1);
    CHECK(sigma.piece_of(0.5) == 2);
    auto m = line_medium(sigma, 30.0, 0.02);
    auto u0 = sample_line(m.x, [](double x) { return cplx(std::exp(-x * x)); });
    EvolutionConfig cfg;
    cfg.dt = 1e-3;
    auto r = evolve_line_sigma(u0, sigma, 1.0, cfg);
    CHECK(std::abs(l2_norm(r) - l2_norm(u0)) < 1e-10 * l2_norm(u0));

    // breakpoints must be grid nodes
    PiecewiseCoefficient off({1.0, 2.0, 1.0}, 1.005);
    CHECK_THROWS_AS(evolve_line_sigma(u0, off, 1.0, cfg), std::invalid_argument);
}

TEST_CASE("input validation") {
    auto s = gaussian_star(3, 20.0, 0.05);
    EvolutionConfig cfg;
    cfg.dt = 0.3;
    CHECK_THROWS_AS(evolve_graph(s, 1.0, cfg), std::invalid_argument);
    cfg.dt = -1e-3;
    CHECK_THROWS_AS(evolve_graph(s, 1.0, cfg), std::invalid_argument);

    auto g = build_star(3, 20.0, 0.05);
    auto bad = sample_state(g, [](std::size_t e, double x) { return cplx((e + 1.0) * std::exp(-x * x)); });
    CHECK_THROWS_AS(evolve_graph(bad, 0.1, {}), std::invalid_argument);
}

TEST_CASE("boundary guard") {
    auto s = gaussian_star(3, 4.0, 0.05, 4.0);
    EvolutionConfig cfg;
    cfg.dt = 1e-3;
    cfg.guard_boundary = true;
    CHECK_THROWS_AS(evolve_graph(s, 2.0, cfg), NumericalGuard);
    CHECK(tail_fraction(s) < 1e-6);
}

TEST_CASE("checkpoint format") {
    auto s = gaussian_star(2, 1.6, 0.1);
    std::ostringstream os;
    write_checkpoint(os, s, 1e-3);
    std::istringstream is(os.str());
    std::string head, cols, row;
    std::getline(is, head);
    std::getline(is, cols);
    std::getline(is, row);
    CHECK(head.rfind("# t=0,h=0.1", 0) == 0);
    CHECK(head.find("L=1.6") != std::string::npos);
    CHECK(cols == "edge_id,x,re_u,im_u");
    CHECK(row == "0,0,1,0");
}

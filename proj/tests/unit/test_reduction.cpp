#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qgraph/evolution.hpp"
#include "qgraph/reduction.hpp"

using namespace qgraph;

namespace {

// radial data in root distance; continuous at every vertex
GraphState radial_tree(const GraphBuild& g, const std::function<cplx(double)>& f) {
    return sample_state(g, [&](std::size_t e, double x) { return f(g.grid.offset[e] + x); });
}

double deriv_left(const LineSamples& f, std::size_t i) {
    double h = f.x[i] - f.x[i - 1];
    return std::abs((3.0 * f.u[i] - 4.0 * f.u[i - 1] + f.u[i - 2]) / (2.0 * h));
}

double deriv_right(const LineSamples& f, std::size_t i) {
    double h = f.x[i + 1] - f.x[i];
    return std::abs((-3.0 * f.u[i] + 4.0 * f.u[i + 1] - f.u[i + 2]) / (2.0 * h));
}

std::size_t index_of(const LineSamples& f, double x) {
    for (std::size_t i = 0; i < f.x.size(); ++i)
        if (std::abs(f.x[i] - x) < 1e-9) return i;
    FAIL("node not found");
    return 0;
}

}  // namespace

TEST_CASE("star sums") {
    auto g = build_star(3, 10.0, 0.05);
    auto s = sample_state(g, [](std::size_t, double x) { return cplx(std::exp(-x * x), x * std::exp(-x * x)); });
    auto even = star_sum(s, StarMode::even);
    REQUIRE(even.size() == 1);
    const auto& S = even.front();
    CHECK(S.x.size() == 2 * s.values[0].size() - 1);
    CHECK(S.x.front() == doctest::Approx(-10.0));
    for (std::size_t i = 0; i < S.x.size(); ++i) {
        double x = std::abs(S.x[i]);
        CHECK(std::abs(S.u[i] - 3.0 * cplx(std::exp(-x * x), x * std::exp(-x * x))) < 1e-15);
    }
    auto odd = star_sum(s, StarMode::odd_difference);
    CHECK(odd.size() == 3);
    for (const auto& d : odd)
        for (const auto& v : d.u) CHECK(std::abs(v) < 1e-15);

    // components vanishing at the vertex with zero sum: odd extensions are continuous
    auto z = sample_state(g, [](std::size_t e, double x) {
        double c = e == 0 ? 2.0 : -1.0;
        return cplx(c * x * std::exp(-x * x));
    });
    auto oz = star_sum(z, StarMode::odd_difference);
    std::size_t mid = oz[0].x.size() / 2;
    CHECK(oz[0].x[mid] == 0.0);
    for (const auto& d : oz) {
        CHECK(std::abs(d.u[mid]) < 1e-15);
        CHECK(std::abs(d.u[mid - 1] + d.u[mid + 1]) < 1e-15);
    }
    CHECK_THROWS_AS(star_sum(radial_tree(build_regular_tree({1.0}, {2, 2}, 10.0, 0.1), [](double) { return 1.0; }),
                             StarMode::even),
                    std::invalid_argument);
}

TEST_CASE("evolving the star sum matches evolving the star") {
    auto g = build_star(3, 30.0, 0.02);
    auto s = sample_state(g, [](std::size_t e, double x) {
        return std::exp(-x * x) * cplx(1.0 + 0.5 * e * std::sin(oracle::pi * x) * std::sin(oracle::pi * x), 0.2 * x);
    });
    EvolutionConfig cfg;
    cfg.dt = 1e-3;
    auto star_then_sum = star_sum(evolve_graph(s, 0.5, cfg), StarMode::even).front();

    auto S0 = star_sum(s, StarMode::even).front();
    LineMedium m{S0.x, std::vector<double>(S0.x.size() - 1, 1.0)};
    auto sum_then_line = evolve_line(S0, m, 0.5, cfg);
    CHECK(relative_l2_error(sum_then_line, star_then_sum) < 1e-3);
}

TEST_CASE("averaged sums") {
    auto g = build_regular_tree({1.0}, {2, 2}, 10.0, 0.05);
    // same profile per generation, different across generations
    auto s = sample_state(g, [&](std::size_t e, double x) {
        double r = g.grid.offset[e] + x;
        return cplx(std::exp(-r * r));
    });
    auto sums = averaged_sums(s);
    CHECK(sums.breakpoints == std::vector<double>{0.0, 1.0});
    CHECK(sums.Z.size() == 6);
    for (const auto& [alpha, Z] : sums.Z)
        for (std::size_t i = 0; i < Z.x.size(); ++i) CHECK(std::abs(Z.u[i] - std::exp(-Z.x[i] * Z.x[i])) < 1e-15);
    CHECK(sums.root.x.front() == 0.0);
    CHECK(sums.root.x.back() == doctest::Approx(11.0));

    // Z^alpha = u^alpha on the edge alpha itself
    auto varied = sample_state(g, [&](std::size_t e, double x) {
        return cplx(std::exp(-x * x) * (1.0 + e), 0.1 * e) * (g.graph.edge(e).infinite() ? x : 1.0);
    });
    auto vs = averaged_sums(varied);
    for (std::size_t e = 0; e < g.graph.edge_count(); ++e) {
        const auto& Z = vs.Z.at(g.graph.edge(e).multi_index);
        for (std::size_t i = 0; i < varied.values[e].size(); ++i) CHECK(Z.u[i] == varied.values[e][i]);
    }

    // opposite profiles on sibling rays cancel in the parent average
    auto pm = sample_state(g, [&](std::size_t e, double x) {
        const auto& mi = g.graph.edge(e).multi_index;
        if (mi.size() == 1) return cplx(0.0);
        return cplx((mi[1] == 1 ? 1.0 : -1.0) * x * std::exp(-x * x));
    });
    auto ps = averaged_sums(pm);
    for (int a : {1, 2}) {
        const auto& Z = ps.Z.at({a});
        for (const auto& v : Z.u) CHECK(std::abs(v) < 1e-15);
        auto d = difference_Z(ps, {a}, 1);
        for (std::size_t i = 0; i < d.x.size(); ++i) {
            double y = d.x[i] - 1.0;  // local coordinate on the ray
            CHECK(std::abs(d.u[i] - y * std::exp(-y * y)) < 1e-15);
        }
    }
    CHECK_THROWS_AS(difference_Z(ps, {1, 1}, 1), std::out_of_range);
    CHECK_THROWS_AS(difference_Z(ps, {1}, 3), std::out_of_range);
    for (const auto& v : difference_Z(sums, {}, 2).u) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("averaged sums of a solver state") {
    auto g = build_regular_tree({1.0}, {2, 2}, 20.0, 0.01);
    auto s = radial_tree(g, [](double r) { return cplx(std::exp(-(r - 0.5) * (r - 0.5))); });
    EvolutionConfig cfg;
    cfg.dt = 1e-3;
    auto r = evolve_graph(s, 0.2, cfg);
    auto sums = averaged_sums(r);
    std::size_t i = index_of(sums.root, 1.0);
    double ratio = deriv_left(sums.root, i) / deriv_right(sums.root, i);
    CHECK(ratio == doctest::Approx(2.0).epsilon(2e-2));

    for (int a : {1, 2}) {
        CHECK(std::abs(difference_Z(sums, {}, a).u.front()) < 1e-10);
        for (int b : {1, 2}) CHECK(std::abs(difference_Z(sums, {a}, b).u.front()) < 1e-10);
    }
}

TEST_CASE("reduction map") {
    auto bin = reduction_map({{1.0}, {2, 2}});
    CHECK(bin.sigma == std::vector<double>{1.0, 0.25, 0.25, 1.0});
    CHECK(bin.folded == std::vector<double>{-1.0, 0.0, 1.0});
    CHECK(bin.sigma_minus() == 1.0);
    CHECK(bin.sigma_plus() == 1.0);
    CHECK(bin.map(0.0) == 0.0);
    CHECK(bin.map(1.0) == doctest::Approx(0.5));
    CHECK(bin.map(-1.0) == doctest::Approx(-0.5));
    CHECK(bin.map(3.0) == doctest::Approx(2.5));

    auto star = reduction_map({{}, {3}});
    CHECK(star.sigma == std::vector<double>{1.0, 1.0});
    CHECK(star.map(-2.0) == doctest::Approx(-2.0));

    auto d23 = reduction_map({{1.0}, {2, 3}});
    CHECK(d23.sigma[1] == doctest::Approx(1.0 / 9.0));
    CHECK(d23.sigma[2] == doctest::Approx(1.0 / 9.0));

    // binary closed form 2^{|n + 1/2 - k| - (n + 1/2)} for the slopes
    auto deep = reduction_map({{1.0, 0.5, 2.0}, {2, 2, 2, 2}});
    const int n = 3;
    for (int k = 0; k <= 2 * n + 1; ++k)
        CHECK(deep.slope[k] == doctest::Approx(std::pow(2.0, std::abs(n + 0.5 - k) - (n + 0.5))));

    for (const auto& meta : {TreeMetadata{{1.0, 2.0}, {2, 3, 4}}, TreeMetadata{{0.5, 0.5, 0.5}, {1, 2, 3, 2}},
                             TreeMetadata{{}, {5}}}) {
        auto m = reduction_map(meta);
        const std::size_t K = m.slope.size();
        CHECK(m.sigma_minus() == 1.0);
        CHECK(m.sigma_plus() == 1.0);
        for (std::size_t k = 0; k < K; ++k) CHECK(m.sigma[k] == doctest::Approx(m.sigma[K - 1 - k]));
        for (std::size_t k = 1; k < K; ++k) CHECK(m.slope[k - 1] == doctest::Approx(m.slope[k] / m.jump[k - 1]));
        for (std::size_t k = 0; k < m.folded.size(); ++k) {
            CHECK(m.map(m.folded[k]) == doctest::Approx(m.b[k]));
            // continuity from the left
            CHECK(m.map(m.folded[k] - 1e-12) == doctest::Approx(m.b[k]).epsilon(1e-9));
        }
        for (double x = -10.0; x < 10.0; x += 0.1) CHECK(m.map(x + 0.1) > m.map(x));
    }
    CHECK_THROWS_AS(reduction_map({{1.0}, {2}}), std::invalid_argument);
    CHECK_THROWS_AS(reduction_map({{1.0}, {2, 0}}), std::invalid_argument);

    std::ostringstream os;
    write_reduction_csv(os, bin);
    CHECK(os.str().rfind("k,a_tilde,b,slope,sigma\n0,-inf,-inf,1,1\n1,-1,-0.5,0.5,0.25\n", 0) == 0);
}

TEST_CASE("folding") {
    auto g = build_regular_tree({1.0}, {2, 2}, 10.0, 0.05);
    auto c = sample_state(g, [](std::size_t, double) { return cplx(0.7, -0.2); });
    auto sums = averaged_sums(c);
    auto map = reduction_map(*g.graph.tree());
    auto w = fold_to_line(sums, map);
    for (const auto& v : w.u) CHECK(v == cplx(0.7, -0.2));
    for (std::size_t i = 1; i < w.x.size(); ++i) CHECK(w.x[i] > w.x[i - 1]);

    auto sym = radial_tree(g, [](double r) { return cplx(std::exp(-r * r), r); });
    auto ws = fold_to_line(averaged_sums(sym), map);
    for (std::size_t i = 0; i < ws.x.size(); ++i) {
        CHECK(ws.x[i] == doctest::Approx(-ws.x[ws.x.size() - 1 - i]));
        CHECK(ws.u[i] == ws.u[ws.u.size() - 1 - i]);
    }

    auto med = fold_medium(ws, map);
    CHECK(med.sigma.front() == 1.0);
    CHECK(med.sigma[med.sigma.size() / 2] == 0.25);
}

TEST_CASE("fold then evolve equals evolve then fold") {
    auto g = build_regular_tree({1.0}, {2, 2}, 20.0, 0.01);
    auto s = radial_tree(g, [](double r) { return cplx(std::exp(-(r - 1.0) * (r - 1.0)), 0.3 * r); });
    auto map = reduction_map(*g.graph.tree());
    EvolutionConfig cfg;
    cfg.dt = 1e-3;

    auto tree_then_fold = fold_to_line(averaged_sums(evolve_graph(s, 0.3, cfg)), map);
    auto w0 = fold_to_line(averaged_sums(s), map);
    auto fold_then_line = evolve_line(w0, fold_medium(w0, map), 0.3, cfg);
    CHECK(relative_l2_error(fold_then_line, tree_then_fold) < 2e-2);
}

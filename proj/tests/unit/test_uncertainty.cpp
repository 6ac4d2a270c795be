#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qgraph/evolution.hpp"
#include "qgraph/uncertainty.hpp"

using namespace qgraph;

namespace {

LineSamples line_of(double lo, double hi, double h, const std::function<cplx(double)>& f) {
    std::vector<double> x;
    for (int i = 0; lo + i * h <= hi + 1e-12; ++i) x.push_back(lo + i * h);
    return sample_line(x, f);
}

// u_t = Z u_xx from exp(-x^2)
cplx heat_gaussian(cplx Z, double t, double x) {
    cplx d = 1.0 + 4.0 * Z * t;
    return std::exp(-x * x / d) / std::sqrt(d);
}

double slice_norm(const SliceFamily& u, double t, double weight, double X) {
    return std::sqrt(oracle::trapezoid([&](double x) { return std::exp(2.0 * weight * x * x) * std::norm(u(t, x)); },
                                       -X, X, 40000));
}

}  // namespace

TEST_CASE("decay fits on exact Gaussians") {
    auto a = line_of(-10, 10, 0.01, [](double x) { return cplx(std::exp(-x * x / 4.0)); });
    auto f = fit_gaussian_decay(a, Side::both, 1.0, 6.0);
    CHECK(f.rate == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(f.residual < 1e-10);

    auto b = line_of(-5, 5, 0.01, [](double x) { return 3.0 * std::exp(cplx(-2.0 * x * x, x)); });
    auto g = fit_gaussian_decay(b, Side::positive, 0.5, 3.0);
    CHECK(g.rate == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(g.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-6));

    // different rates on the two sides: the slower side wins
    auto c = line_of(-10, 10, 0.01, [](double x) { return cplx(std::exp(-(x < 0 ? 0.5 : 0.2) * x * x)); });
    CHECK(fit_gaussian_decay(c, Side::both, 1.0, 4.0).rate == doctest::Approx(0.2).epsilon(1e-6));
    CHECK(fit_gaussian_decay(c, Side::negative, 1.0, 4.0).rate == doctest::Approx(0.5).epsilon(1e-6));

    std::mt19937 rng(21);
    std::uniform_real_distribution<double> rate(0.05, 2.0), lo(0.0, 2.0), width(0.3, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        double r = rate(rng), l = lo(rng), w = width(rng);
        auto s = line_of(-(l + w + 1), l + w + 1, 0.01, [r](double x) { return cplx(std::exp(-r * x * x)); });
        double fit = fit_gaussian_decay(s, Side::both, l, l + w).rate;
        CHECK(std::abs(fit - r) <= 1e-6 * r);
    }

    auto zero = line_of(-5, 5, 0.1, [](double x) { return cplx(x < 0 ? std::exp(-x * x) : 0.0); });
    auto zf = fit_gaussian_decay(zero, Side::positive, 1.0, 4.0);
    CHECK(zf.identically_zero);

    auto sparse = line_of(-5, 5, 0.5, [](double x) { return cplx(std::exp(-x * x)); });
    CHECK_THROWS_AS(fit_gaussian_decay(sparse, Side::both, 1.0, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(fit_gaussian_decay(a, Side::both, 3.0, 2.0), std::invalid_argument);
}

TEST_CASE("critical exponent") {
    CHECK(gamma_Gamma(2) == 0.5);
    CHECK(gamma_Gamma(4) == 0.5);
    CHECK(gamma_Gamma(3) == 1.0);
    CHECK(gamma_Gamma(5) == 0.75);
    CHECK(gamma_Gamma(7) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(gamma_Gamma(1), std::invalid_argument);
}

TEST_CASE("threshold classification") {
    ThresholdContext free;
    free.kind = ThresholdContext::Kind::star_free;
    auto v = classify_threshold(0.25, 0.25, free);
    CHECK(v.regime == Regime::boundary);
    CHECK(v.threshold == 1.0 / 16.0);
    CHECK(classify_threshold(0.5, 0.25, free).regime == Regime::above);
    CHECK(classify_threshold(0.1, 0.25, free).regime == Regime::below);

    ThresholdContext line;
    line.kind = ThresholdContext::Kind::line_sigma;
    line.sigma_minus = 1.0;
    line.sigma_plus = 0.25;
    line.line_case = 3;
    CHECK(classify_threshold(1.0, 1.0, line).threshold == 1.0 / 16.0);
    line.line_case = 2;
    CHECK(classify_threshold(1.0, 1.0, line).threshold == 1.0);
    line.line_case = 1;
    CHECK(classify_threshold(1.0, 1.0, line).threshold == 1.0 / 16.0);
    line.line_case = 4;
    CHECK_THROWS_AS(classify_threshold(1.0, 1.0, line), std::invalid_argument);

    ThresholdContext pot;
    pot.kind = ThresholdContext::Kind::star_potential;
    pot.N = 3;
    CHECK(classify_threshold(1.0, 1.0, pot).threshold == 4.0);
    pot.N = 4;
    CHECK(classify_threshold(1.0, 1.0, pot).threshold == 0.25);

    CHECK_THROWS_AS(classify_threshold(0.0, 1.0, free), std::invalid_argument);
    CHECK(to_string(Regime::boundary) == "boundary");

    // increasing either rate never moves a verdict down
    auto rank = [](Regime r) { return r == Regime::below ? 0 : r == Regime::boundary ? 1 : 2; };
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(0.01, 1.0), bump(1.0, 3.0);
    for (int trial = 0; trial < 500; ++trial) {
        double a = u(rng), b = u(rng);
        for (const auto& ctx : {free, pot}) {
            int r0 = rank(classify_threshold(a, b, ctx).regime);
            CHECK(rank(classify_threshold(a * bump(rng), b, ctx).regime) >= r0);
            CHECK(rank(classify_threshold(a, b * bump(rng), ctx).regime) >= r0);
        }
    }
}

TEST_CASE("star sharpness example") {
    for (double alpha : {0.125, 0.25, 0.5}) {
        auto ex = sharp_example_star(alpha, 3);
        CHECK(ex.beta == doctest::Approx(1.0 / (16.0 * alpha)));
        // the closed form is free evolution of exp(-(alpha + i/4) x^2)
        for (double x : {0.0, 1.0, 3.5}) {
            CHECK(std::abs(ex.u0(x) - std::exp(cplx(-alpha, -0.25) * x * x)) < 1e-15);
            CHECK(std::abs(ex.u1(x) - oracle::free_gaussian(cplx(alpha, 0.25), 1.0, x)) < 1e-14);
        }
    }
    auto q = sharp_example_star(0.25, 3);
    for (double x : {0.0, 2.0, 5.0}) CHECK(std::abs(q.u1(x)) == doctest::Approx(std::exp(-x * x / 4.0)));

    auto g = build_star(3, 30.0, 0.02);
    auto s = sample_state(g, [&](std::size_t, double x) { return q.u0(x); });
    EvolutionConfig cfg;
    cfg.dt = 1e-3;
    auto r = evolve_graph(s, 1.0, cfg);
    auto num = edge_samples(r, 0);
    auto exact = sample_line(num.x, q.u1, 1.0);
    CHECK(relative_l2_error(num, exact) < 1e-3);

    double a0 = fit_gaussian_decay(edge_samples(s, 0), Side::positive, 1.0, 4.0).rate;
    double b1 = fit_gaussian_decay(num, Side::positive, 1.0, 4.0).rate;
    CHECK(a0 * b1 == doctest::Approx(1.0 / 16.0).epsilon(0.05));
    ThresholdContext free;
    free.kind = ThresholdContext::Kind::star_free;
    CHECK(classify_threshold(a0, b1, free).regime == Regime::boundary);
}

TEST_CASE("two-step sharpness example") {
    auto same = sharp_example_two_step(1.0, 1.0);
    CHECK(same.alpha == 1.0);
    CHECK(same.beta == 1.0 / 16.0);
    for (double x : {-2.0, 0.0, 1.5}) CHECK(std::abs(same.u1(x) - oracle::free_gaussian(cplx(1.0, 0.25), 1.0, x)) < 1e-14);

    auto ex = sharp_example_two_step(1.0, 2.0);
    CHECK(std::abs(ex.u1(-3.0)) == doctest::Approx(0.5 * std::exp(-9.0 / 16.0)));
    CHECK(std::abs(ex.u1(1.0)) == doctest::Approx(0.5 * std::exp(-4.0 / 16.0)));

    PiecewiseCoefficient sigma({1.0, 2.0}, 1.0);
    auto m = line_medium(sigma, 30.0, 0.01);
    auto u0 = sample_line(m.x, ex.u0);
    EvolutionConfig cfg;
    cfg.dt = 5e-4;
    auto r = evolve_line_sigma(u0, sigma, 1.0, cfg);
    auto exact = sample_line(m.x, ex.u1, 1.0);
    CHECK(relative_l2_error(restrict_to(r, -20, 0), restrict_to(exact, -20, 0)) < 1e-3);
    CHECK(relative_l2_error(restrict_to(r, 0, 10), restrict_to(exact, 0, 10)) < 1e-3);
}

TEST_CASE("Appell transform") {
    SliceFamily u = [](double t, double x) { return oracle::free_gaussian(1.0, t, x); };

    AppellParams same{0.7, 0.7, 0.0, 1.0};
    auto id = appell_transform(u, same, Direction::forward);
    for (double t : {0.0, 0.4, 1.0})
        for (double x : {-2.0, 0.3}) CHECK(std::abs(id(t, x) - u(t, x)) < 1e-15);
    CHECK(appell_time(0.4, same) == doctest::Approx(0.4));

    AppellParams p{1.0, 4.0, 0.0, 1.0};
    CHECK(appell_time(0.0, p) == 0.0);
    CHECK(appell_time(1.0, p) == 1.0);

    // round trip
    auto there = appell_transform(u, p, Direction::forward);
    auto back = appell_transform(there, p, Direction::inverse);
    double worst = 0.0;
    for (double t = 0.0; t <= 1.0; t += 0.125)
        for (double x = -4.0; x <= 4.0; x += 0.5) worst = std::max(worst, std::abs(back(t, x) - u(t, x)));
    CHECK(worst < 1e-10);

    // the transform of a solution is a solution: central differences of u~_t - i u~_xx
    const double d = 1e-3;
    for (double t : {0.3, 0.6})
        for (double x : {-1.0, 0.0, 0.8}) {
            cplx ut = (there(t + d, x) - there(t - d, x)) / (2.0 * d);
            cplx uxx = (there(t, x + d) - 2.0 * there(t, x) + there(t, x - d)) / (d * d);
            CHECK(std::abs(ut - cplx(0.0, 1.0) * uxx) < 1e-4);  // O(d^2) truncation
        }

    // weighted norm identity by direct quadrature of both sides
    for (const auto& params : {AppellParams{1.0, 4.0, 0.0, 1.0}, AppellParams{0.5, 2.0, 0.3, 1.0}}) {
        cplx Z(params.A, params.B);
        SliceFamily v = [Z](double t, double x) { return heat_gaussian(Z, t, x); };
        auto tv = appell_transform(v, params, Direction::forward);
        for (double t : {0.0, 0.5, 0.9})
            for (double gamma : {0.0, 0.01}) {  // both sides finite: the free Gaussian spreads
                double lhs = slice_norm(tv, t, gamma, 25.0);
                double rhs = slice_norm(v, appell_time(t, params), appell_norm_exponent(t, gamma, params), 25.0);
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
            }
    }
    CHECK_THROWS_AS(appell_transform(u, AppellParams{1.0, 1.0, 0.0, 0.0}, Direction::forward), std::invalid_argument);
    CHECK_THROWS_AS(appell_time(0.5, AppellParams{-1.0, 1.0, 0.0, 1.0}), std::invalid_argument);
}

#include <doctest.h>

#include <cmath>

#include "qgraph/carleman.hpp"
#include "qgraph/uncertainty.hpp"

using namespace qgraph;

namespace {

// both sides by a tensor trapezoid rule, summing over every (k, j) pair directly
std::pair<double, double> brute_sides(const ZcompSample& q, const WeightParams& w, const AlphaVectors& av, int nt,
                                      int nx) {
    const int N = q.N();
    const double X = q.support(), ht = 1.0 / (nt - 1), hx = X / (nx - 1);
    double sq = 0.0, sp = 0.0;
    for (int it = 1; it < nt - 1; ++it) {  // q vanishes at t = 0, 1
        double t = it * ht;
        for (int ix = 0; ix < nx; ++ix) {
            double x = ix * hx, wx = (ix == 0 || ix == nx - 1) ? 0.5 : 1.0;
            for (int j = 0; j < N; ++j) {
                double a2 = std::norm(q.q(j, t, x));
                double p2 = std::norm(q.q_t(j, t, x) + cplx(0.0, 1.0) * q.q_xx(j, t, x));
                for (int k = 0; k < N; ++k) {
                    double e = std::exp(2.0 * carleman_phi(w, av.value(k, j), t, x));
                    sq += wx * e * a2;
                    sp += wx * e * p2;
                }
            }
        }
    }
    sq *= ht * hx;
    sp *= ht * hx;
    return {w.R * w.R * w.eps / (8.0 * w.mu) * sq, sp};
}

}  // namespace

TEST_CASE("alpha vectors") {
    auto a4 = alpha_vectors(4);
    CHECK(a4.exact.size() == 4);
    std::vector<double> first;
    for (int j = 0; j < 4; ++j) first.push_back(a4.value(0, j));
    CHECK(first == std::vector<double>{1, -1, 1, -1});
    for (int k = 1; k < 4; ++k)
        for (int j = 0; j < 4; ++j) CHECK(a4.exact[k][j] == a4.exact[k - 1][(j + 3) % 4]);

    auto a3 = alpha_vectors(3);
    const std::vector<std::vector<Rational>> expect{
        {Rational(-1), Rational(-1), Rational(2)}, {Rational(2), Rational(-1), Rational(-1)}, {Rational(-1), Rational(2), Rational(-1)}};
    CHECK(a3.exact == expect);
    for (int j = 0; j < 3; ++j) {
        Rational sq(0);
        for (int k = 0; k < 3; ++k) sq += a3.exact[k][j] * a3.exact[k][j];
        CHECK(sq == Rational(6));
    }

    auto a5 = alpha_vectors(5);
    CHECK(a5.exact[0][4] == Rational(3, 2));
    CHECK(a5.exact[0][1] == Rational(-1));

    for (int N = 2; N <= 11; ++N) {
        auto av = alpha_vectors(N);
        auto inv = check_alpha_invariants(av);
        CHECK(inv.vector_sums_zero);
        CHECK(inv.slot_sums_zero);
        CHECK(inv.square_sums_constant);
        CHECK(inv.min_abs_at_least_one);
        CHECK(inv.max_abs_is_two_gamma);
        CHECK(inv.all());
    }
    CHECK_THROWS_AS(alpha_vectors(1), std::invalid_argument);

    // a broken vector set is caught
    auto bad = alpha_vectors(3);
    bad.exact[0][0] = Rational(-2);
    CHECK_FALSE(check_alpha_invariants(bad).all());
}

TEST_CASE("weight function") {
    WeightParams w{0.7, 0.3, 5.0};
    for (int N : {3, 4, 5}) {
        auto av = alpha_vectors(N);
        for (double t : {0.1, 0.5, 0.8}) {
            double phi0 = carleman_phi(w, av.value(0, 0), t, 0.0);
            for (int k = 0; k < N; ++k) {
                double flux = 0.0;
                for (int j = 0; j < N; ++j) {
                    flux += carleman_phi_x(w, av.value(k, j), t, 0.0);
                    CHECK(carleman_phi(w, av.value(k, j), t, 0.0) == doctest::Approx(phi0));
                }
                CHECK(std::abs(flux) < 1e-12);
            }
        }
    }
    const double d = 1e-6;
    for (double x : {0.0, 0.4, 1.7}) {
        double fd = (carleman_phi(w, -1.5, 0.3, x + d) - carleman_phi(w, -1.5, 0.3, x - d)) / (2.0 * d);
        CHECK(carleman_phi_x(w, -1.5, 0.3, x) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("Z_comp samples") {
    auto q = sample_zcomp(4, 17);
    auto again = sample_zcomp(4, 17);
    auto other = sample_zcomp(4, 18);
    CHECK(q.q(2, 0.4, 0.7) == again.q(2, 0.4, 0.7));
    CHECK(q.q(2, 0.4, 0.7) != other.q(2, 0.4, 0.7));

    for (int N : {2, 3, 5}) {
        auto s = sample_zcomp(N, 99 + N);
        double worst_flux = 0.0, worst_cont = 0.0;
        for (double t = 0.0; t <= 1.0; t += 0.01) {
            cplx flux = 0.0;
            for (int j = 0; j < N; ++j) {
                flux += s.q_x(j, t, 0.0);
                worst_cont = std::max(worst_cont, std::abs(s.q(j, t, 0.0) - s.q(0, t, 0.0)));
            }
            worst_flux = std::max(worst_flux, std::abs(flux));
        }
        CHECK(worst_flux <= 1e-12);
        CHECK(worst_cont <= 1e-12);
        for (int j = 0; j < N; ++j) {
            CHECK(s.q(j, 0.0, 0.5) == cplx(0.0));
            CHECK(s.q(j, 1.0, 0.5) == cplx(0.0));
            CHECK(s.q(j, 0.5, s.support()) == cplx(0.0));
        }
    }

    // analytic derivatives against central differences
    const double d = 1e-5;
    for (int j = 0; j < 4; ++j)
        for (double t : {0.3, 0.55})
            for (double x : {0.2, 0.9, 1.6}) {
                cplx qt = (q.q(j, t + d, x) - q.q(j, t - d, x)) / (2.0 * d);
                cplx qx = (q.q(j, t, x + d) - q.q(j, t, x - d)) / (2.0 * d);
                cplx qxx = (q.q(j, t, x + d) - 2.0 * q.q(j, t, x) + q.q(j, t, x - d)) / (d * d);
                CHECK(std::abs(q.q_t(j, t, x) - qt) < 1e-6 * (1.0 + std::abs(qt)));
                CHECK(std::abs(q.q_x(j, t, x) - qx) < 1e-6 * (1.0 + std::abs(qx)));
                CHECK(std::abs(q.q_xx(j, t, x) - qxx) < 1e-3 * (1.0 + std::abs(qxx)));
            }

    auto z = zero_zcomp(3);
    CHECK(z.q(1, 0.5, 0.5) == cplx(0.0));
    CHECK_THROWS_AS(sample_zcomp(1, 0), std::invalid_argument);
}

TEST_CASE("Carleman sides") {
    auto av3 = alpha_vectors(3);
    auto zero = carleman_sides(zero_zcomp(3), WeightParams{1.0, 0.5, 4.0}, av3);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);

    auto q = sample_zcomp(3, 1);
    WeightParams w{1.0, 0.5, 4.0};
    auto s = carleman_sides(q, w, av3);
    CHECK(s.rhs >= s.lhs);
    CHECK(s.margin == doctest::Approx(s.rhs - s.lhs));

    // the right side needs fine nodes before it converges; the left side does not
    auto [lhs, rhs] = brute_sides(q, w, av3, 801, 1601);
    auto fine = carleman_sides(q, w, av3, 801, 1601);
    CHECK(s.lhs == doctest::Approx(lhs).epsilon(1e-6));
    CHECK(fine.rhs == doctest::Approx(rhs).epsilon(1e-6));
    // the half-resolution estimate bounds the actual error at the default nodes
    CHECK(std::abs(s.rhs - fine.rhs) + std::abs(s.lhs - fine.lhs) <= s.error_estimate);
    CHECK(s.error_estimate < s.margin);

    cplx c(0.6, -1.3);
    auto sc = carleman_sides(q.scaled(c), w, av3);
    CHECK(sc.lhs == doctest::Approx(std::norm(c) * s.lhs).epsilon(1e-12));
    CHECK(sc.rhs == doctest::Approx(std::norm(c) * s.rhs).epsilon(1e-12));

    WeightParams w2 = w;
    w2.eps = 0.25;
    // a batch over parameters equals one-at-a-time evaluation
    std::vector<WeightParams> params{w, w2, {2.0, 0.25, 8.0}};
    auto batch = carleman_sides(q, params, av3);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto one = carleman_sides(q, params[i], av3);
        CHECK(batch[i].lhs == one.lhs);
        CHECK(batch[i].rhs == one.rhs);
        CHECK(batch[i].margin >= 0.0);
    }

    CHECK_THROWS_AS(carleman_sides(q, w, av3, 200, 401), std::invalid_argument);
    CHECK_THROWS_AS(carleman_sides(q, w, av3, 201, 403), std::invalid_argument);
    CHECK_THROWS_AS(carleman_sides(q, w, alpha_vectors(4)), std::invalid_argument);
    CHECK_THROWS_AS(carleman_sides(q, WeightParams{0.0, 0.5, 4.0}, av3), std::invalid_argument);
    CHECK_THROWS_AS(carleman_sides(q, WeightParams{400.0, 0.5, 4.0}, av3), NumericalGuard);
}

TEST_CASE("Carleman inequality over the parameter grid") {
    for (int N : {3, 4, 5}) {
        auto av = alpha_vectors(N);
        std::vector<WeightParams> params;
        for (double mu : {0.5, 1.0, 2.0})
            for (double eps : {0.25, 0.5})
                for (double R : {2.0, 4.0, 8.0}) params.push_back({mu, eps, R});
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            auto q = sample_zcomp(N, seed);
            for (const auto& s : carleman_sides(q, params, av, 101, 201)) CHECK(s.margin > -s.error_estimate);
        }
    }
}

#include "qgraph/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "qgraph/uncertainty.hpp"

namespace qgraph {

AlphaVectors alpha_vectors(int N) {
    if (N < 2) throw std::invalid_argument("alpha vectors need N >= 2");
    AlphaVectors av;
    av.N = N;
    std::vector<Rational> first(static_cast<std::size_t>(N));
    if (N % 2 == 0) {
        for (int j = 0; j < N; ++j) first[j] = Rational(j % 2 == 0 ? 1 : -1);
    } else {
        const int m = (N - 1) / 2;
        for (int j = 0; j < N; ++j) first[j] = j < m + 1 ? Rational(-1) : Rational(m + 1, m);
    }
    av.exact.push_back(first);
    for (int k = 1; k < N; ++k) {
        std::vector<Rational> next = av.exact.back();
        std::rotate(next.rbegin(), next.rbegin() + 1, next.rend());
        av.exact.push_back(std::move(next));
    }
    return av;
}

AlphaInvariants check_alpha_invariants(const AlphaVectors& av) {
    const int N = av.N;
    AlphaInvariants inv;
    inv.vector_sums_zero = inv.slot_sums_zero = inv.square_sums_constant = true;
    Rational square0(0), maxabs(0), minabs(-1);
    for (int k = 0; k < N; ++k) {
        Rational s(0);
        for (int j = 0; j < N; ++j) s += av.exact[k][j];
        if (s != Rational(0)) inv.vector_sums_zero = false;
    }
    for (int j = 0; j < N; ++j) {
        Rational s(0), sq(0);
        for (int k = 0; k < N; ++k) {
            const Rational& v = av.exact[k][j];
            s += v;
            sq += v * v;
            Rational a = abs(v);
            maxabs = std::max(maxabs, a);
            minabs = minabs < Rational(0) ? a : std::min(minabs, a);
        }
        if (s != Rational(0)) inv.slot_sums_zero = false;
        if (j == 0) square0 = sq;
        else if (sq != square0) inv.square_sums_constant = false;
    }
    inv.min_abs_at_least_one = minabs >= Rational(1);
    // 2 gamma_Gamma(N): 1 for even N, (m+1)/m for N = 2m+1
    Rational two_gamma = N % 2 == 0 ? Rational(1) : Rational((N - 1) / 2 + 1, (N - 1) / 2);
    inv.max_abs_is_two_gamma = maxabs == two_gamma && std::abs(2.0 * gamma_Gamma(N) - boost::rational_cast<double>(two_gamma)) < 1e-15;
    return inv;
}

double carleman_phi(const WeightParams& w, double alpha, double t, double x) {
    double s = t * (1.0 - t);
    double y = alpha * x + w.R * s;
    return w.mu * y * y - (1.0 + w.eps) * w.R * w.R * s / (16.0 * w.mu);
}

double carleman_phi_x(const WeightParams& w, double alpha, double t, double x) {
    return 2.0 * w.mu * alpha * (alpha * x + w.R * t * (1.0 - t));
}

// ---- bump functions

namespace {

struct Jet {
    double f, d1, d2;
};

// chi(s) = exp(1 - 1/(1 - s^2)) on |s| < 1, zero outside; chi(0) = 1, chi'(0) = 0
Jet chi(double s) {
    if (std::abs(s) >= 1.0) return {0.0, 0.0, 0.0};
    double w = 1.0 - s * s;
    double f = std::exp(1.0 - 1.0 / w);
    double g1 = -2.0 * s / (w * w);
    double g2 = -(2.0 + 6.0 * s * s) / (w * w * w);
    return {f, f * g1, f * (g1 * g1 + g2)};
}

// b(t) = exp(4 - 1/(t(1-t))) on (0,1); b(1/2) = 1
Jet time_bump(double t) {
    if (t <= 0.0 || t >= 1.0) return {0.0, 0.0, 0.0};
    double s = t * (1.0 - t);
    double f = std::exp(4.0 - 1.0 / s);
    return {f, f * (1.0 - 2.0 * t) / (s * s), 0.0};
}

Jet spatial(const ZcompSample::Term& term, double X, double x) {
    switch (term.kind) {
        case 0: {
            Jet c = chi(x / X);
            return {c.f, c.d1 / X, c.d2 / (X * X)};
        }
        case 1: {
            Jet c = chi(x / X);
            return {x * c.f, c.f + x * c.d1 / X, 2.0 * c.d1 / X + x * c.d2 / (X * X)};
        }
        default: {
            Jet c = chi((x - term.centre) / term.width);
            return {c.f, c.d1 / term.width, c.d2 / (term.width * term.width)};
        }
    }
}

}  // namespace

ZcompSample::ZcompSample(int N, double support, std::vector<std::vector<Term>> terms)
    : N_(N), support_(support), terms_(std::move(terms)) {
    if (N_ < 2) throw std::invalid_argument("Z_comp samples need N >= 2");
    if (!(support_ > 0.0)) throw std::invalid_argument("support must be positive");
    if (terms_.size() != static_cast<std::size_t>(N_)) throw std::invalid_argument("need one term list per edge");
}

cplx ZcompSample::q(int j, double t, double x) const {
    cplx s = 0.0;
    Jet b = time_bump(t);
    if (b.f == 0.0) return s;
    for (const Term& term : terms_.at(j)) s += term.coeff * std::polar(b.f, term.omega * t) * spatial(term, support_, x).f;
    return s;
}

cplx ZcompSample::q_t(int j, double t, double x) const {
    cplx s = 0.0;
    Jet b = time_bump(t);
    if (b.f == 0.0) return s;
    for (const Term& term : terms_.at(j)) {
        cplx tp = term.coeff * std::polar(1.0, term.omega * t) * (b.d1 + cplx(0.0, term.omega) * b.f);
        s += tp * spatial(term, support_, x).f;
    }
    return s;
}

cplx ZcompSample::q_x(int j, double t, double x) const {
    cplx s = 0.0;
    Jet b = time_bump(t);
    if (b.f == 0.0) return s;
    for (const Term& term : terms_.at(j)) s += term.coeff * std::polar(b.f, term.omega * t) * spatial(term, support_, x).d1;
    return s;
}

cplx ZcompSample::q_xx(int j, double t, double x) const {
    cplx s = 0.0;
    Jet b = time_bump(t);
    if (b.f == 0.0) return s;
    for (const Term& term : terms_.at(j)) s += term.coeff * std::polar(b.f, term.omega * t) * spatial(term, support_, x).d2;
    return s;
}

ZcompSample ZcompSample::scaled(cplx c) const {
    auto terms = terms_;
    for (auto& row : terms)
        for (auto& term : row) term.coeff *= c;
    return ZcompSample(N_, support_, std::move(terms));
}

ZcompSample zero_zcomp(int N, double support) {
    return ZcompSample(N, support, std::vector<std::vector<ZcompSample::Term>>(static_cast<std::size_t>(N)));
}

ZcompSample sample_zcomp(int N, std::uint64_t seed, int budget, double support) {
    if (N < 2) throw std::invalid_argument("Z_comp samples need N >= 2");
    if (budget < 0) throw std::invalid_argument("budget must be non-negative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> freq(-6.0, 6.0);
    std::uniform_real_distribution<double> where(0.25, 0.75);
    auto coeff = [&] { return cplx(unit(rng), unit(rng)); };

    std::vector<std::vector<ZcompSample::Term>> terms(static_cast<std::size_t>(N));
    // shared vertex profile, zero slope at the vertex
    ZcompSample::Term common{coeff(), freq(rng), 0};
    // slope corrections summing to zero over the edges
    const double omega_d = freq(rng);
    std::vector<cplx> d(static_cast<std::size_t>(N));
    cplx mean = 0.0;
    for (auto& v : d) mean += (v = coeff());
    mean /= static_cast<double>(N);
    for (auto& v : d) v -= mean;
    for (int j = 0; j < N; ++j) {
        terms[j].push_back(common);
        terms[j].push_back({d[j], omega_d, 1});
        for (int r = 0; r < budget; ++r) {
            double c = where(rng) * support;
            double w = std::min(c, support - c) * (0.3 + 0.6 * std::abs(unit(rng)));
            terms[j].push_back({coeff(), freq(rng), 2, c, w});
        }
    }
    return ZcompSample(N, support, std::move(terms));
}

namespace {

std::vector<double> simpson_weights(int n, double length) {
    if (n < 3 || n % 2 == 0) throw std::invalid_argument("Simpson rule needs an odd node count >= 3");
    double h = length / (n - 1);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[i] = (i == 0 || i == n - 1) ? h / 3.0 : (i % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
    return w;
}

// |q_j|^2 and |(d_t + i Delta) q_j|^2 on the fine tensor grid
struct SampleGrid {
    int nt, nx, N;
    double X;
    std::vector<double> a2, p2;  // index ((it * nx) + ix) * N + j
};

SampleGrid sample_grid(const ZcompSample& q, int nt, int nx) {
    SampleGrid g{nt, nx, q.N(), q.support(), {}, {}};
    const std::size_t total = static_cast<std::size_t>(nt) * nx * q.N();
    g.a2.resize(total);
    g.p2.resize(total);
    std::size_t idx = 0;
    for (int it = 0; it < nt; ++it) {
        double t = static_cast<double>(it) / (nt - 1);
        for (int ix = 0; ix < nx; ++ix) {
            double x = g.X * static_cast<double>(ix) / (nx - 1);
            for (int j = 0; j < g.N; ++j, ++idx) {
                g.a2[idx] = std::norm(q.q(j, t, x));
                g.p2[idx] = std::norm(q.q_t(j, t, x) + cplx(0.0, 1.0) * q.q_xx(j, t, x));
            }
        }
    }
    return g;
}

struct Integrals {
    double lhs, rhs, max_phi;
};

// stride 1 uses every node, stride 2 the embedded coarse grid
Integrals integrate(const SampleGrid& g, const WeightParams& w, const AlphaVectors& av, int stride) {
    const int nt = (g.nt - 1) / stride + 1, nx = (g.nx - 1) / stride + 1;
    auto wt = simpson_weights(nt, 1.0);
    auto wx = simpson_weights(nx, g.X);
    const int N = g.N;
    std::vector<double> values;
    for (const auto& row : av.exact)
        for (const auto& v : row) values.push_back(boost::rational_cast<double>(v));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<std::vector<std::size_t>> slot(N, std::vector<std::size_t>(N));
    for (int k = 0; k < N; ++k)
        for (int j = 0; j < N; ++j)
            slot[k][j] = static_cast<std::size_t>(
                std::lower_bound(values.begin(), values.end(), av.value(k, j)) - values.begin());

    std::vector<double> e(values.size()), weight(N);
    double sum_q = 0.0, sum_p = 0.0, max_phi = -1e300;
    for (int it = 0; it < nt; ++it) {
        double t = static_cast<double>(it) / (nt - 1);
        for (int ix = 0; ix < nx; ++ix) {
            double x = g.X * static_cast<double>(ix) / (nx - 1);
            std::size_t base = (static_cast<std::size_t>(it * stride) * g.nx + ix * stride) * N;
            bool any = false;
            for (int j = 0; j < N; ++j) any = any || g.a2[base + j] != 0.0 || g.p2[base + j] != 0.0;
            for (std::size_t v = 0; v < values.size(); ++v) {
                double phi = carleman_phi(w, values[v], t, x);
                max_phi = std::max(max_phi, phi);
                if (any && 2.0 * phi > 700.0)
                    throw NumericalGuard("exp(2 phi) overflows on the support (max phi " + std::to_string(phi) + ")");
                e[v] = any ? std::exp(2.0 * phi) : 0.0;
            }
            if (!any) continue;
            double cell = wt[it] * wx[ix];
            for (int j = 0; j < N; ++j) {
                double s = 0.0;
                for (int k = 0; k < N; ++k) s += e[slot[k][j]];
                sum_q += cell * s * g.a2[base + j];
                sum_p += cell * s * g.p2[base + j];
            }
        }
    }
    return {w.R * w.R * w.eps / (8.0 * w.mu) * sum_q, sum_p, max_phi};
}

}  // namespace

std::vector<CarlemanSides> carleman_sides(const ZcompSample& q, const std::vector<WeightParams>& params,
                                          const AlphaVectors& av, int t_nodes, int x_nodes) {
    if (av.N != q.N()) throw std::invalid_argument("alpha vectors and sample disagree on N");
    for (int n : {t_nodes, x_nodes})
        if (n < 5 || (n - 1) % 4 != 0) throw std::invalid_argument("node counts must be of the form 4m+1");
    for (const auto& w : params)
        if (!(w.mu > 0.0) || !(w.eps > 0.0) || !(w.R > 0.0)) throw std::invalid_argument("mu, eps, R must be positive");
    SampleGrid g = sample_grid(q, t_nodes, x_nodes);
    std::vector<CarlemanSides> out;
    for (const auto& w : params) {
        Integrals fine = integrate(g, w, av, 1);
        Integrals coarse = integrate(g, w, av, 2);
        CarlemanSides c;
        c.lhs = fine.lhs;
        c.rhs = fine.rhs;
        c.margin = fine.rhs - fine.lhs;
        c.error_estimate = std::abs(fine.lhs - coarse.lhs) + std::abs(fine.rhs - coarse.rhs);
        c.max_phi = fine.max_phi;
        out.push_back(c);
    }
    return out;
}

CarlemanSides carleman_sides(const ZcompSample& q, const WeightParams& w, const AlphaVectors& av, int t_nodes,
                             int x_nodes) {
    return carleman_sides(q, std::vector<WeightParams>{w}, av, t_nodes, x_nodes).front();
}

}  // namespace qgraph

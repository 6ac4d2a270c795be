#include "qgraph/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace qgraph {

namespace {

constexpr double kPi = std::numbers::pi;

void check_junction(std::size_t j, const LayerParams& p) {
    if (j < 1 || j + 1 > p.N()) throw std::out_of_range("junction index out of range");
}

void check_kernel_ready(const LayerParams& p) {
    if (p.N() < 2) throw std::invalid_argument("the transfer representation needs N >= 2 layers");
}

double dot(const ExpPolynomial::Index& n, const std::vector<double>& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) s += n[i] * a[i];
    return s;
}

// lambda_1 ... lambda_{k-1} = exp(-i xi l (a_2 + ... + a_k - (k-1) a_k))
double lambda_shift(std::size_t k, const LayerParams& p) {
    double s = 0.0;
    for (std::size_t i = 2; i <= k; ++i) s += p.aj(i);
    return p.l * (s - static_cast<double>(k - 1) * p.aj(k));
}

}  // namespace

cplx LayerParams::lambda(std::size_t j, double xi) const {
    return std::polar(1.0, -xi * delta_j(j) * static_cast<double>(j - 1) * l);
}

cplx LayerParams::mu(std::size_t j, double xi) const {
    return gamma_j(j) * std::polar(1.0, -xi * eps_j(j) * static_cast<double>(j - 1) * l);
}

LayerParams layer_params(const std::vector<double>& a, double l) {
    if (a.empty()) throw std::invalid_argument("need at least one layer");
    for (double v : a)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("layer values must be positive");
    if (a.size() > 1 && !(l > 0.0)) throw std::invalid_argument("layer spacing must be positive");
    LayerParams p;
    p.a = a;
    p.l = l;
    for (std::size_t j = 0; j + 1 < a.size(); ++j) {
        p.delta.push_back(a[j] - a[j + 1]);
        p.eps.push_back(a[j] + a[j + 1]);
        p.gamma.push_back(p.delta.back() / p.eps.back());
    }
    return p;
}

Eigen::Matrix2cd transfer_matrix(std::size_t j, double xi, const LayerParams& p) {
    check_junction(j, p);
    cplx lam = p.lambda(j, xi), mu = p.mu(j, xi);
    Eigen::Matrix2cd T;
    T << lam, std::conj(mu), mu, std::conj(lam);
    return (p.eps_j(j) / (2.0 * p.aj(j))) * T;
}

Eigen::Matrix2cd chain_product(std::size_t j, std::size_t k, double xi, const LayerParams& p) {
    if (k > j) throw std::invalid_argument("chain product needs k <= j");
    check_junction(j, p);
    check_junction(k, p);
    Eigen::Matrix2cd M = transfer_matrix(k, xi, p);
    for (std::size_t m = k + 1; m <= j; ++m) M = transfer_matrix(m, xi, p) * M;
    return M;
}

EFPair ef_recursion(std::size_t j, std::size_t k, const LayerParams& p) {
    if (k > j) throw std::invalid_argument("E/F recursion needs k <= j");
    check_junction(j, p);
    check_junction(k, p);
    EFPair ef{ExpPolynomial::constant(p.a, p.l, 1.0, +1), ExpPolynomial::constant(p.a, p.l, p.gamma_j(k), -1)};
    for (std::size_t m = k + 1; m <= j; ++m) {
        double g = p.gamma_j(m);
        ExpPolynomial up = ExpPolynomial::monomial(p.a, p.l, g, k + 1, m, +1);
        ExpPolynomial down = ExpPolynomial::monomial(p.a, p.l, g, k + 1, m, -1);
        ExpPolynomial E = ef.E + up * ef.Ft;
        ExpPolynomial F = ef.Ft + down * ef.E;
        E.prune();
        F.prune();
        ef = {std::move(E), std::move(F)};
    }
    return ef;
}

double chain_prefactor(std::size_t j, std::size_t k, const LayerParams& p) {
    double r = 1.0;
    for (std::size_t m = k; m <= j; ++m) r *= p.eps_j(m) / (2.0 * p.aj(m));
    return r;
}

std::pair<cplx, cplx> closed_form_entries(std::size_t j, std::size_t k, double xi, const LayerParams& p,
                                          const EFPair& ef) {
    cplx lam = 1.0;
    for (std::size_t m = k; m <= j; ++m) lam *= std::conj(p.lambda(m, xi));
    double P = chain_prefactor(j, k, p);
    cplx phase = std::polar(1.0, -2.0 * xi * p.l * static_cast<double>(k - 1) * p.aj(k));
    return {P * lam * phase * ef.Ft(xi), P * lam * std::conj(ef.E(xi))};
}

double determinant_product(std::size_t j, std::size_t k, const LayerParams& p) {
    double P = chain_prefactor(j, k, p);
    double r = P * P;
    for (std::size_t m = k; m <= j; ++m) r *= 1.0 - p.gamma_j(m) * p.gamma_j(m);
    return r;
}

double alpha_coefficient(std::size_t k, const LayerParams& p) {
    if (k < 1 || k > p.N()) throw std::out_of_range("alpha index out of range");
    double r = 1.0;
    for (std::size_t i = 1; i < k; ++i) r *= p.eps_j(i) / (2.0 * p.aj(i)) * (1.0 - p.gamma_j(i) * p.gamma_j(i));
    return r;
}

CoefficientPair coefficients_C(std::size_t k, double xi, const LayerParams& p) {
    check_kernel_ready(p);
    const std::size_t N = p.N();
    if (k < 1 || k > N) throw std::out_of_range("coefficient index out of range");
    const cplx c11 = p.aj(1) / (2.0 * kPi);
    const cplx Ebar1 = std::conj(ef_recursion(N - 1, 1, p).E(xi));
    if (std::abs(Ebar1) < 1e-12) throw NumericalGuard("conj(E_{N-1,1}) vanishes: degenerate layer data");
    cplx Ebar = 1.0, Ft = 0.0;
    if (k < N) {
        EFPair ef = ef_recursion(N - 1, k, p);
        Ebar = std::conj(ef.E(xi));
        Ft = ef.Ft(xi);
    }
    const cplx pre = alpha_coefficient(k, p) * std::polar(1.0, -xi * lambda_shift(k, p)) * c11;
    const cplx phase = std::polar(1.0, -2.0 * xi * p.l * static_cast<double>(k - 1) * p.aj(k));
    return {pre * Ebar / Ebar1, -pre * phase * Ft / Ebar1};
}

// ---- Wiener inversion

std::vector<double> default_xi_grid(const LayerParams& p, std::size_t points) {
    if (points < 2) throw std::invalid_argument("xi grid needs at least two points");
    double amin = *std::min_element(p.a.begin(), p.a.end());
    double xm = 2.0 * kPi / (p.l * amin);
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = -xm + 2.0 * xm * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

WienerSeries invert_E(const LayerParams& p, int K, const std::vector<double>& xi_grid) {
    check_kernel_ready(p);
    if (K < 0) throw std::invalid_argument("truncation order must be >= 0");
    const std::size_t N = p.N();
    WienerSeries out{ExpPolynomial(p.a, p.l, -1), K, 0.0, {}, 0.0, 0};
    out.grid_points = xi_grid.size();

    // 1/E_{1,1} = 1; 1/E_{j,1} = 1/E_{j-1,1} * sum_n (-q_j)^n,
    // q_j = gamma_j e^{2 i xi l (a_2+..+a_j)} F~_{j-1,1} / E_{j-1,1}; every term of q_j has weight >= 1.
    ExpPolynomial inv = ExpPolynomial::constant(p.a, p.l, 1.0, +1);
    for (std::size_t j = 2; j <= N - 1; ++j) {
        EFPair prev = ef_recursion(j - 1, 1, p);
        ExpPolynomial q = (ExpPolynomial::monomial(p.a, p.l, p.gamma_j(j), 2, j, +1) * prev.Ft).truncated(K);
        q = (q * inv).truncated(K);
        q.prune();
        ExpPolynomial geo = ExpPolynomial::constant(p.a, p.l, 1.0, +1);
        ExpPolynomial power = geo;
        ExpPolynomial minus_q = -q;
        for (int n = 1; n <= K; ++n) {
            power = (power * minus_q).truncated(K);
            power.prune();
            if (power.size() == 0) break;
            geo += power;
        }
        inv = (inv * geo).truncated(K);
        inv.prune();
    }
    out.series = inv.conj();

    for (std::size_t j = 1; j + 1 <= N - 1; ++j) {
        EFPair ef = ef_recursion(j, 1, p);
        double m = 0.0;
        for (double xi : xi_grid) m = std::max(m, std::abs(ef.Ft(xi) / ef.E(xi)));
        out.level_rho.push_back(m);
        out.rho = std::max(out.rho, m);
    }
    if (out.rho >= 1.0) throw NumericalGuard("contraction ratio >= 1 on the xi grid");
    out.tail_bound = std::pow(out.rho, K + 1) / (1.0 - out.rho);
    return out;
}

double wiener_residual(const WienerSeries& s, const LayerParams& p, const std::vector<double>& xi_grid) {
    ExpPolynomial E = ef_recursion(p.N() - 1, 1, p).E;
    double r = 0.0;
    for (double xi : xi_grid) r = std::max(r, std::abs(s(xi) * std::conj(E(xi)) - 1.0));
    return r;
}

void write_series_csv(std::ostream& os, const WienerSeries& s, const LayerParams& p) {
    os.precision(17);
    os << "# N=" << p.N() << ",a=[";
    for (std::size_t i = 0; i < p.N(); ++i) os << (i ? ";" : "") << p.a[i];
    os << "],l=" << p.l << ",K=" << s.K << ",rho=" << s.rho << "\n";
    for (std::size_t i = 2; i + 1 <= p.N(); ++i) os << 'n' << i << ',';
    os << "re_c,im_c\n";
    for (const auto& [n, c] : s.series.terms()) {
        for (std::size_t i = 1; i + 1 < n.size(); ++i) os << n[i] << ',';
        os << c.real() << ',' << c.imag() << '\n';
    }
}

// ---- kernels

cplx free_kernel(double t, double x) {
    if (t == 0.0) throw std::invalid_argument("the free kernel needs t != 0");
    return std::polar(1.0, x * x / (4.0 * t)) / std::sqrt(cplx(0.0, 4.0 * kPi * t));
}

cplx kernel_h(double t, double x, const WienerSeries& s) {
    if (t == 0.0) throw std::invalid_argument("the kernel h_t needs t != 0");
    const double l = s.series.spacing();
    const auto& a = s.series.a();
    cplx sum = 0.0;
    for (const auto& [n, c] : s.series.terms()) sum += c * free_kernel(t, x - 2.0 * l * dot(n, a));
    return sum;
}

std::vector<KernelAtom> kernel_p1k_atoms(std::size_t k, const LayerParams& p) {
    check_kernel_ready(p);
    const std::size_t N = p.N();
    if (k < 1 || k > N) throw std::out_of_range("kernel index out of range");
    const double a1 = p.aj(1), l = p.l;
    std::vector<KernelAtom> atoms;
    using B = KernelAtom::Base;
    if (k == 1) {
        atoms.push_back({a1, a1, 0.0, B::free});
        const ExpPolynomial F = ef_recursion(N - 1, 1, p).Ft.with_sign(+1);
        for (const auto& [m, f] : F.terms())
            atoms.push_back({-a1 * f, -a1, -2.0 * l * dot(m, p.a), B::h});
        return atoms;
    }
    const double w = a1 * alpha_coefficient(k, p);
    const double ak = p.aj(k);
    const double c = lambda_shift(k, p);
    if (k == N) {
        atoms.push_back({w, ak, c, B::h});
        return atoms;
    }
    EFPair ef = ef_recursion(N - 1, k, p);
    for (const auto& [m, e] : ef.E.terms()) atoms.push_back({w * std::conj(e), ak, c + 2.0 * l * dot(m, p.a), B::h});
    const ExpPolynomial F = ef.Ft.with_sign(+1);
    for (const auto& [m, f] : F.terms())
        atoms.push_back({-w * f, -ak, c + 2.0 * l * static_cast<double>(k - 1) * ak - 2.0 * l * dot(m, p.a), B::h});
    return atoms;
}

namespace {

// closed y-interval of I_k
std::pair<double, double> piece_interval(std::size_t k, const LayerParams& p) {
    const double lo = k == 1 ? -kInfinity : static_cast<double>(k - 2) * p.l;
    const double hi = k == p.N() ? kInfinity : static_cast<double>(k - 1) * p.l;
    return {lo, hi};
}

}  // namespace

cplx kernel_p1k(std::size_t k, double t, double x, double y, const LayerParams& p, const WienerSeries& s) {
    auto [lo, hi] = piece_interval(k, p);
    if (y < lo || y > hi) throw std::invalid_argument("y lies outside I_k");
    cplx sum = 0.0;
    for (const KernelAtom& at : kernel_p1k_atoms(k, p)) {
        double X = p.aj(1) * x - at.scale * y - at.shift;
        sum += at.weight * (at.base == KernelAtom::Base::free ? free_kernel(t, X) : kernel_h(t, X, s));
    }
    return sum;
}

double EtaAtom::image_lo() const { return scale > 0 ? scale * y_lo + shift : scale * y_hi + shift; }
double EtaAtom::image_hi() const { return scale > 0 ? scale * y_hi + shift : scale * y_lo + shift; }

cplx EtaProfile::operator()(double z, const std::function<cplx(double)>& u0) const {
    cplx sum = 0.0;
    for (const EtaAtom& at : atoms) {
        double y = (z - at.shift) / at.scale;
        if (y > at.y_lo && y < at.y_hi) sum += at.weight / std::abs(at.scale) * u0(y);
    }
    return sum;
}

EtaProfile eta_profile(const LayerParams& p, const WienerSeries& s) {
    check_kernel_ready(p);
    EtaProfile eta;
    eta.outer = p.aj(1);
    // merge atoms sharing (piece, scale, shift)
    std::map<std::tuple<std::size_t, double, long long>, std::size_t> slot;
    auto add = [&](std::size_t k, cplx w, double scale, double shift) {
        auto key = std::make_tuple(k, scale, std::llround(shift * 1e9));
        auto it = slot.find(key);
        if (it != slot.end()) {
            eta.atoms[it->second].weight += w;
            return;
        }
        auto [lo, hi] = piece_interval(k, p);
        slot.emplace(key, eta.atoms.size());
        eta.atoms.push_back({w, scale, shift, lo, hi});
    };
    const auto& a = s.series.a();
    for (std::size_t k = 1; k <= p.N(); ++k)
        for (const KernelAtom& at : kernel_p1k_atoms(k, p)) {
            if (at.base == KernelAtom::Base::free) {
                add(k, at.weight, at.scale, at.shift);
                continue;
            }
            for (const auto& [n, c] : s.series.terms())
                add(k, at.weight * c, at.scale, at.shift + 2.0 * p.l * dot(n, a));
        }
    return eta;
}

// ---- quadrature against sampled u0

namespace {

struct Nodes {
    std::vector<double> y;
    std::vector<cplx> wu;  // trapezoid weight times u0
};

Nodes nodes_on(const LineSamples& u0, double lo, double hi) {
    Nodes n;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < u0.x.size(); ++i)
        if (u0.x[i] >= lo - 1e-12 && u0.x[i] <= hi + 1e-12) idx.push_back(i);
    if (idx.size() < 2) return n;
    for (std::size_t m = 0; m < idx.size(); ++m) {
        std::size_t i = idx[m];
        double left = m > 0 ? u0.x[i] - u0.x[idx[m - 1]] : 0.0;
        double right = m + 1 < idx.size() ? u0.x[idx[m + 1]] - u0.x[i] : 0.0;
        n.y.push_back(u0.x[i]);
        n.wu.push_back(0.5 * (left + right) * u0.u[i]);
    }
    return n;
}

void check_breakpoint_nodes(const LineSamples& u0, const std::vector<double>& breaks) {
    for (double b : breaks) {
        bool found = std::any_of(u0.x.begin(), u0.x.end(), [b](double x) { return std::abs(x - b) <= 1e-10; });
        if (!found) throw std::invalid_argument("breakpoint " + std::to_string(b) + " is not a grid node of u0");
    }
}

void check_tails(const LineSamples& u0) {
    double m = 0.0;
    for (cplx v : u0.u) m = std::max(m, std::abs(v));
    if (m == 0.0) return;
    double edge = std::max(std::abs(u0.u.front()), std::abs(u0.u.back()));
    if (edge > 1e-10 * m) throw NumericalGuard("insufficient quadrature domain: u0 does not decay at the grid ends");
}

cplx kernel_sum(double t, const cplx& c0, double X, const Nodes& nd, double scale, double shift) {
    cplx s = 0.0;
    const double inv4t = 1.0 / (4.0 * t);
    for (std::size_t i = 0; i < nd.y.size(); ++i) {
        double z = X - scale * nd.y[i] - shift;
        s += std::polar(1.0, z * z * inv4t) * nd.wu[i];
    }
    return c0 * s;
}

}  // namespace

LineSamples convolve_profile(const EtaProfile& eta, const LineSamples& u0, double t, const std::vector<double>& x) {
    if (t == 0.0) throw std::invalid_argument("convolution needs t != 0");
    check_tails(u0);
    std::vector<double> breaks;
    for (const EtaAtom& at : eta.atoms)
        for (double b : {at.y_lo, at.y_hi})
            if (std::isfinite(b)) breaks.push_back(b);
    check_breakpoint_nodes(u0, breaks);
    std::vector<Nodes> nodes;
    for (const EtaAtom& at : eta.atoms) nodes.push_back(nodes_on(u0, at.y_lo, at.y_hi));
    const cplx c0 = 1.0 / std::sqrt(cplx(0.0, 4.0 * kPi * t));
    LineSamples out{x, std::vector<cplx>(x.size()), t};
    for (std::size_t i = 0; i < x.size(); ++i) {
        cplx s = 0.0;
        for (std::size_t a = 0; a < eta.atoms.size(); ++a)
            s += eta.atoms[a].weight * kernel_sum(t, c0, eta.outer * x[i], nodes[a], eta.atoms[a].scale, eta.atoms[a].shift);
        out.u[i] = s;
    }
    return out;
}

HalflineSolution solve_negative_halfline(const LineSamples& u0, const PiecewiseCoefficient& sigma, double t,
                                         const std::vector<double>& x, const WienerSeries& s, Assembly how) {
    if (t == 0.0) throw std::invalid_argument("the representation holds for t != 0");
    for (double v : x)
        if (v > 0.0) throw std::invalid_argument("the representation covers x <= 0 only");
    LayerParams p = layer_params(sigma.values(), sigma.spacing());
    HalflineSolution sol{{}, eta_profile(p, s)};
    if (how == Assembly::eta) {
        sol.u = convolve_profile(sol.eta, u0, t, x);
        return sol;
    }

    check_tails(u0);
    std::vector<double> breaks;
    for (std::size_t j = 1; j < p.N(); ++j) breaks.push_back(sigma.breakpoint(j));
    check_breakpoint_nodes(u0, breaks);
    const cplx c0 = 1.0 / std::sqrt(cplx(0.0, 4.0 * kPi * t));
    const auto& a = s.series.a();
    struct Piece {
        Nodes nodes;
        std::vector<KernelAtom> atoms;
    };
    std::vector<Piece> pieces;
    for (std::size_t k = 1; k <= p.N(); ++k) {
        auto [lo, hi] = piece_interval(k, p);
        pieces.push_back({nodes_on(u0, lo, hi), kernel_p1k_atoms(k, p)});
    }
    sol.u = LineSamples{x, std::vector<cplx>(x.size()), t};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double X = p.aj(1) * x[i];
        cplx total = 0.0;
        for (const Piece& pc : pieces)
            for (const KernelAtom& at : pc.atoms) {
                if (at.base == KernelAtom::Base::free) {
                    total += at.weight * kernel_sum(t, c0, X, pc.nodes, at.scale, at.shift);
                    continue;
                }
                cplx h = 0.0;  // integral of h_t(X - scale y - shift) u0(y)
                for (const auto& [n, c] : s.series.terms())
                    h += c * kernel_sum(t, c0, X, pc.nodes, at.scale, at.shift + 2.0 * p.l * dot(n, a));
                total += at.weight * h;
            }
        sol.u.u[i] = total;
    }
    return sol;
}

TwoStepProfiles two_step_psi(double a1, double a2) {
    if (!(a1 > 0.0) || !(a2 > 0.0)) throw std::invalid_argument("a1, a2 must be positive");
    const double r = (a2 - a1) / (a1 + a2);
    const double tau = 2.0 * a1 / (a1 + a2);
    TwoStepProfiles pr;
    pr.psi.outer = a1;
    pr.psi.atoms = {{a1, a1, 0.0, -kInfinity, 0.0},
                    {r * a1, -a1, 0.0, -kInfinity, 0.0},
                    {tau * a2, a2, 0.0, 0.0, kInfinity}};
    const double r2 = -r;
    const double tau2 = 2.0 * a2 / (a1 + a2);
    pr.psi_tilde.outer = a2;
    pr.psi_tilde.atoms = {{a2, a2, 0.0, 0.0, kInfinity},
                          {r2 * a2, -a2, 0.0, 0.0, kInfinity},
                          {tau2 * a1, a1, 0.0, -kInfinity, 0.0}};
    return pr;
}

LineSamples two_step_solution(const TwoStepProfiles& prof, const LineSamples& u0, double t,
                              const std::vector<double>& x) {
    std::vector<double> neg, pos;
    for (double v : x) (v <= 0.0 ? neg : pos).push_back(v);
    LineSamples left = convolve_profile(prof.psi, u0, t, neg);
    LineSamples right = convolve_profile(prof.psi_tilde, u0, t, pos);
    LineSamples out{x, std::vector<cplx>(x.size()), t};
    std::size_t in = 0, ip = 0;
    for (std::size_t i = 0; i < x.size(); ++i) out.u[i] = x[i] <= 0.0 ? left.u[in++] : right.u[ip++];
    return out;
}

}  // namespace qgraph

#include "qgraph/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "network.hpp"

namespace qgraph {

namespace detail {

constexpr std::size_t kBoundary = std::numeric_limits<std::size_t>::max();

CrankNicolson::CrankNicolson(const Network& net, double dt) {
    const auto n = static_cast<Eigen::Index>(net.size());
    const cplx half(0.0, 0.5 * dt);
    std::vector<Eigen::Triplet<cplx>> lhs, rhs;
    lhs.reserve(net.size() + 4 * net.links.size());
    rhs.reserve(net.size() + 4 * net.links.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        lhs.emplace_back(i, i, net.mass[i]);
        rhs.emplace_back(i, i, net.mass[i]);
    }
    auto add = [&](std::size_t r, std::size_t c, double k) {
        lhs.emplace_back(r, c, -half * k);
        rhs.emplace_back(r, c, half * k);
    };
    for (const auto& link : net.links) {
        add(link.i, link.i, -link.c);
        if (link.j == kBoundary) continue;
        add(link.j, link.j, -link.c);
        add(link.i, link.j, link.c);
        add(link.j, link.i, link.c);
    }
    Eigen::SparseMatrix<cplx> A(n, n);
    A.setFromTriplets(lhs.begin(), lhs.end());
    rhs_.resize(n, n);
    rhs_.setFromTriplets(rhs.begin(), rhs.end());
    lu_.analyzePattern(A);
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success) throw NumericalGuard("Crank-Nicolson factorisation failed");
}

void CrankNicolson::step(Eigen::VectorXcd& u) const {
    Eigen::VectorXcd b = rhs_ * u;
    u = lu_.solve(b);
}

std::size_t step_count(double t_final, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!std::isfinite(t_final)) throw std::invalid_argument("t_final must be finite");
    double n = std::abs(t_final) / dt;
    double r = std::round(n);
    if (std::abs(n - r) > 1e-9 * std::max(1.0, n)) throw std::invalid_argument("dt does not divide t_final");
    return static_cast<std::size_t>(r);
}

}  // namespace detail

using detail::kBoundary;

// ---- piecewise coefficient

PiecewiseCoefficient::PiecewiseCoefficient(std::vector<double> a, double l) : a_(std::move(a)), l_(l) {
    if (a_.empty()) throw std::invalid_argument("need at least one coefficient value");
    for (double v : a_)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("coefficient values must be positive");
    if (a_.size() > 1 && !(l_ > 0.0)) throw std::invalid_argument("breakpoint spacing must be positive");
}

std::size_t PiecewiseCoefficient::piece_of(double x) const {
    if (a_.size() == 1 || x < 0.0) return 1;
    auto j = static_cast<std::size_t>(std::floor(x / l_)) + 2;
    return std::min(j, a_.size());
}

LineMedium line_medium(const PiecewiseCoefficient& sigma, double L, double h) {
    if (!(h > 0.0) || !(L > 0.0)) throw std::invalid_argument("L and h must be positive");
    double lo = -L;
    double hi = static_cast<double>(std::max<std::size_t>(sigma.pieces(), 2) - 2) * sigma.spacing() + L;
    if (sigma.pieces() == 1) hi = L;
    double cells = (hi - lo) / h;
    double r = std::round(cells);
    if (std::abs(cells - r) > 1e-9 * cells) throw std::invalid_argument("domain length is not a multiple of h");
    if (sigma.pieces() > 2) {
        double per = sigma.spacing() / h;
        if (std::abs(per - std::round(per)) > 1e-9 * per)
            throw std::invalid_argument("breakpoint spacing is not a multiple of h");
    }
    LineMedium m;
    auto n = static_cast<std::size_t>(r);
    m.x.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) m.x[i] = lo + static_cast<double>(i) * h;
    // snap breakpoints exactly
    for (std::size_t j = 1; j < sigma.pieces(); ++j) {
        double b = sigma.breakpoint(j);
        auto it = std::min_element(m.x.begin(), m.x.end(),
                                   [b](double p, double q) { return std::abs(p - b) < std::abs(q - b); });
        *it = b;
    }
    m.sigma.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.sigma[i] = sigma.sigma(sigma.piece_of(0.5 * (m.x[i] + m.x[i + 1])));
    return m;
}

LineSamples sample_line(const std::vector<double>& x, const std::function<cplx(double)>& f, double time) {
    LineSamples s{x, std::vector<cplx>(x.size()), time};
    for (std::size_t i = 0; i < x.size(); ++i) s.u[i] = f(x[i]);
    return s;
}

// ---- graph layout

namespace {

struct GraphLayout {
    detail::Network net;
    std::vector<std::vector<std::size_t>> node;  // per edge and sample; kBoundary for Dirichlet
};

GraphLayout layout_graph(const MetricGraph& g, const GraphGrid& grid) {
    GraphLayout lay;
    lay.net.mass.assign(g.vertex_count(), 0.0);
    lay.node.resize(g.edge_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        std::size_t n = grid.samples[e];
        double h = grid.spacing[e];
        if (n < 2) throw std::invalid_argument("edge grid needs at least two samples");
        auto& nodes = lay.node[e];
        nodes.resize(n);
        nodes[0] = ed.from;
        lay.net.mass[ed.from] += 0.5 * h;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            nodes[i] = lay.net.mass.size();
            lay.net.mass.push_back(h);
        }
        if (ed.to) {
            nodes[n - 1] = *ed.to;
            lay.net.mass[*ed.to] += 0.5 * h;
        } else {
            nodes[n - 1] = kBoundary;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            std::size_t a = nodes[i], b = nodes[i + 1];
            if (a == kBoundary) std::swap(a, b);
            lay.net.links.push_back({a, b, 1.0 / h});
        }
    }
    return lay;
}

Eigen::VectorXcd gather(const GraphState& s, const GraphLayout& lay) {
    const MetricGraph& g = s.graph;
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(lay.net.size()));
    std::vector<int> seen(g.vertex_count(), 0);
    double scale = 0.0;
    for (const auto& row : s.values)
        for (cplx v : row) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument("state has non-finite values");
            scale = std::max(scale, std::abs(v));
        }
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        if (s.values[e].size() != lay.node[e].size()) throw std::invalid_argument("state does not match its grid");
        for (std::size_t i = 0; i < lay.node[e].size(); ++i) {
            std::size_t k = lay.node[e][i];
            if (k == kBoundary) continue;
            if (k < g.vertex_count()) {
                if (seen[k] && std::abs(u[k] - s.values[e][i]) > 1e-10 * (1.0 + scale))
                    throw std::invalid_argument("initial state is discontinuous at a vertex");
                seen[k] = 1;
            }
            u[static_cast<Eigen::Index>(k)] = s.values[e][i];
        }
    }
    return u;
}

void scatter(const Eigen::VectorXcd& u, const GraphLayout& lay, GraphState& s) {
    for (std::size_t e = 0; e < lay.node.size(); ++e)
        for (std::size_t i = 0; i < lay.node[e].size(); ++i) {
            std::size_t k = lay.node[e][i];
            s.values[e][i] = k == kBoundary ? cplx(0.0) : u[static_cast<Eigen::Index>(k)];
        }
}

// Per-node potential; a vertex takes the mass-weighted mean of its incident edges.
template <class F>
Eigen::VectorXcd node_potential(const GraphState& s, const GraphLayout& lay, F&& V) {
    const auto n = static_cast<Eigen::Index>(lay.net.size());
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (std::size_t e = 0; e < lay.node.size(); ++e) {
        double h = s.grid.spacing[e];
        std::size_t m = lay.node[e].size();
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t k = lay.node[e][i];
            if (k == kBoundary) continue;
            double weight = (i == 0 || i + 1 == m) ? 0.5 * h : h;
            cplx val = V(e, s.grid.coordinate(e, i));
            if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
                throw std::invalid_argument("potential has non-finite samples");
            v[static_cast<Eigen::Index>(k)] += weight * val;
            w[static_cast<Eigen::Index>(k)] += weight;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) v[i] /= w[i];
    return v;
}

void check_guard(const GraphState& s, const EvolutionConfig& cfg) {
    if (!cfg.guard_boundary) return;
    double f = tail_fraction(s);
    if (f > cfg.guard_tolerance)
        throw NumericalGuard("wavefront reached 0.8 L (tail fraction " + std::to_string(f) + ")");
}

GraphState run_graph(const GraphState& u0, const EdgePotential* V1, const EdgeTimePotential* V2, double t_final,
                     const EvolutionConfig& cfg) {
    std::size_t steps = detail::step_count(t_final, cfg.dt);
    GraphLayout lay = layout_graph(u0.graph, u0.grid);
    Eigen::VectorXcd u = gather(u0, lay);
    GraphState out = u0;
    if (steps == 0) return out;
    double dt = t_final < 0.0 ? -cfg.dt : cfg.dt;
    detail::CrankNicolson cn(lay.net, dt);

    Eigen::VectorXcd static_phase;
    if (V1 && *V1) {
        Eigen::VectorXcd v = node_potential(u0, lay, [&](std::size_t e, double x) { return cplx((*V1)(e, x)); });
        static_phase = (cplx(0.0, 0.5 * dt) * v).array().exp();
    }
    const bool timed = V2 && *V2;
    const std::size_t check_every = std::max<std::size_t>(1, steps / 50);
    for (std::size_t n = 0; n < steps; ++n) {
        Eigen::VectorXcd phase;
        if (timed) {
            double tm = u0.time + (static_cast<double>(n) + 0.5) * dt;
            Eigen::VectorXcd v = node_potential(u0, lay, [&](std::size_t e, double x) { return (*V2)(e, tm, x); });
            phase = (cplx(0.0, 0.5 * dt) * v).array().exp();
            if (static_phase.size()) phase = phase.cwiseProduct(static_phase);
        } else if (static_phase.size()) {
            phase = static_phase;
        }
        if (phase.size()) u = u.cwiseProduct(phase);
        cn.step(u);
        if (phase.size()) u = u.cwiseProduct(phase);
        if (cfg.guard_boundary && ((n + 1) % check_every == 0 || n + 1 == steps)) {
            scatter(u, lay, out);
            check_guard(out, cfg);
        }
    }
    scatter(u, lay, out);
    out.time = u0.time + t_final;
    return out;
}

}  // namespace

GraphState evolve_graph(const GraphState& u0, double t_final, const EvolutionConfig& cfg) {
    return run_graph(u0, nullptr, nullptr, t_final, cfg);
}

GraphState evolve_graph_potential(const GraphState& u0, const EdgePotential& V1, const EdgeTimePotential& V2,
                                  double t_final, const EvolutionConfig& cfg) {
    return run_graph(u0, &V1, &V2, t_final, cfg);
}

// ---- line

LineSamples evolve_line(const LineSamples& u0, const LineMedium& medium, double t_final, const EvolutionConfig& cfg) {
    const std::size_t n = medium.x.size();
    if (n < 3 || medium.sigma.size() != n - 1) throw std::invalid_argument("malformed line medium");
    if (u0.x.size() != n) throw std::invalid_argument("samples do not match the medium grid");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(u0.x[i] - medium.x[i]) > 1e-12 * (1.0 + std::abs(medium.x[i])))
            throw std::invalid_argument("samples do not match the medium grid");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(medium.x[i + 1] > medium.x[i])) throw std::invalid_argument("line grid must be increasing");
        if (!(medium.sigma[i] > 0.0)) throw std::invalid_argument("sigma must be positive");
    }
    std::size_t steps = detail::step_count(t_final, cfg.dt);

    // unknowns are the interior nodes 1..n-2; both ends are Dirichlet
    detail::Network net;
    net.mass.resize(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) net.mass[i - 1] = 0.5 * (medium.x[i + 1] - medium.x[i - 1]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double c = medium.sigma[i] / (medium.x[i + 1] - medium.x[i]);
        std::size_t a = i == 0 ? kBoundary : i - 1;
        std::size_t b = i + 1 == n - 1 ? kBoundary : i;
        if (a == kBoundary) std::swap(a, b);
        net.links.push_back({a, b, c});
    }
    Eigen::VectorXcd u(static_cast<Eigen::Index>(n - 2));
    for (std::size_t i = 1; i + 1 < n; ++i) u[static_cast<Eigen::Index>(i - 1)] = u0.u[i];

    LineSamples out = u0;
    out.u.front() = out.u.back() = 0.0;
    if (steps > 0) {
        detail::CrankNicolson cn(net, t_final < 0.0 ? -cfg.dt : cfg.dt);
        const double lo = medium.x.front() + 0.2 * (medium.x.back() - medium.x.front());
        const double hi = medium.x.back() - 0.2 * (medium.x.back() - medium.x.front());
        const std::size_t check_every = std::max<std::size_t>(1, steps / 50);
        for (std::size_t s = 0; s < steps; ++s) {
            cn.step(u);
            if (cfg.guard_boundary && ((s + 1) % check_every == 0 || s + 1 == steps)) {
                for (std::size_t i = 1; i + 1 < n; ++i) out.u[i] = u[static_cast<Eigen::Index>(i - 1)];
                double f = tail_fraction(out, lo, hi);
                if (f > cfg.guard_tolerance)
                    throw NumericalGuard("wavefront reached the truncation zone (tail fraction " +
                                         std::to_string(f) + ")");
            }
        }
    }
    for (std::size_t i = 1; i + 1 < n; ++i) out.u[i] = u[static_cast<Eigen::Index>(i - 1)];
    out.time = u0.time + t_final;
    return out;
}

LineSamples evolve_line_sigma(const LineSamples& u0, const PiecewiseCoefficient& sigma, double t_final,
                              const EvolutionConfig& cfg) {
    const auto& x = u0.x;
    if (x.size() < 3) throw std::invalid_argument("line grid too small");
    for (std::size_t j = 1; j < sigma.pieces(); ++j) {
        double b = sigma.breakpoint(j);
        bool on_grid = std::any_of(x.begin(), x.end(), [b](double p) { return std::abs(p - b) <= 1e-10 * (1.0 + std::abs(b)); });
        if (!on_grid) throw std::invalid_argument("breakpoint " + std::to_string(b) + " is not a grid node");
    }
    LineMedium m;
    m.x = x;
    m.sigma.resize(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) m.sigma[i] = sigma.sigma(sigma.piece_of(0.5 * (x[i] + x[i + 1])));
    return evolve_line(u0, m, t_final, cfg);
}

// ---- diagnostics

double tail_fraction(const GraphState& s) {
    double total = 0.0, tail = 0.0;
    for (std::size_t e = 0; e < s.values.size(); ++e) {
        double h = s.grid.spacing[e];
        std::size_t n = s.values[e].size();
        bool ray = s.graph.edge(e).infinite();
        for (std::size_t i = 0; i < n; ++i) {
            double w = (i == 0 || i + 1 == n) ? 0.5 * h : h;
            double m = w * std::norm(s.values[e][i]);
            total += m;
            if (ray && s.grid.coordinate(e, i) > 0.8 * s.grid.truncation) tail += m;
        }
    }
    return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

double tail_fraction(const LineSamples& s, double inner_lo, double inner_hi) {
    double total = 0.0, tail = 0.0;
    double cut_lo = inner_lo - 0.8 * (inner_lo - s.x.front());
    double cut_hi = inner_hi + 0.8 * (s.x.back() - inner_hi);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        double left = i > 0 ? s.x[i] - s.x[i - 1] : 0.0;
        double right = i + 1 < s.x.size() ? s.x[i + 1] - s.x[i] : 0.0;
        double m = 0.5 * (left + right) * std::norm(s.u[i]);
        total += m;
        if (s.x[i] < cut_lo || s.x[i] > cut_hi) tail += m;
    }
    return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

void write_checkpoint(std::ostream& os, const GraphState& s, double dt) {
    os.precision(17);
    double h = s.grid.spacing.empty() ? 0.0 : s.grid.spacing.front();
    os << "# t=" << s.time << ",h=" << h << ",dt=" << dt << ",L=" << s.grid.truncation << "\n";
    os << "edge_id,x,re_u,im_u\n";
    for (std::size_t e = 0; e < s.values.size(); ++e)
        for (std::size_t i = 0; i < s.values[e].size(); ++i)
            os << e << ',' << s.grid.coordinate(e, i) << ',' << s.values[e][i].real() << ','
               << s.values[e][i].imag() << '\n';
}

// ---- line helpers shared by every module

double l2_norm(const LineSamples& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < f.x.size(); ++i)
        sum += 0.5 * (f.x[i + 1] - f.x[i]) * (std::norm(f.u[i]) + std::norm(f.u[i + 1]));
    return std::sqrt(sum);
}

double relative_l2_error(const LineSamples& f, const LineSamples& g) {
    if (f.x.size() != g.x.size()) throw std::invalid_argument("grids differ");
    LineSamples d = f;
    for (std::size_t i = 0; i < d.u.size(); ++i) {
        if (std::abs(f.x[i] - g.x[i]) > 1e-9 * (1.0 + std::abs(g.x[i]))) throw std::invalid_argument("grids differ");
        d.u[i] = f.u[i] - g.u[i];
    }
    double ng = l2_norm(g);
    return ng > 0.0 ? l2_norm(d) / ng : l2_norm(d);
}

LineSamples restrict_to(const LineSamples& f, double lo, double hi) {
    LineSamples r;
    r.time = f.time;
    for (std::size_t i = 0; i < f.x.size(); ++i)
        if (f.x[i] >= lo - 1e-12 && f.x[i] <= hi + 1e-12) {
            r.x.push_back(f.x[i]);
            r.u.push_back(f.u[i]);
        }
    return r;
}

}  // namespace qgraph

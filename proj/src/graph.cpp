#include "qgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json_io.hpp"

namespace qgraph {

namespace {

std::size_t grid_count(double length, double h, const char* what) {
    double n = length / h;
    double r = std::round(n);
    if (r < 1.0 || std::abs(n - r) > 1e-9 * std::max(1.0, n))
        throw std::invalid_argument(std::string(what) + " is not a multiple of the grid spacing");
    return static_cast<std::size_t>(r) + 1;
}

void check_grid(double L, double h) {
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("truncation length L must be positive");
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid spacing h must be positive");
    if (L / h < 16.0) throw std::invalid_argument("need L/h >= 16");
}

}  // namespace

double TreeMetadata::breakpoint(int k) const {
    if (k < 0 || k > generations()) throw std::out_of_range("breakpoint index");
    return std::accumulate(lengths.begin(), lengths.begin() + k, 0.0);
}

MetricGraph::MetricGraph(std::size_t vertex_count, std::vector<Edge> edges,
                         std::optional<TreeMetadata> tree)
    : vertex_count_(vertex_count), edges_(std::move(edges)), tree_(std::move(tree)),
      out_(vertex_count), in_(vertex_count) {
    if (vertex_count_ == 0) throw std::invalid_argument("graph without vertices");
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const Edge& ed = edges_[e];
        if (ed.from >= vertex_count_) throw std::invalid_argument("edge starts at unknown vertex");
        if (ed.to) {
            if (*ed.to >= vertex_count_) throw std::invalid_argument("edge ends at unknown vertex");
            if (!(ed.length > 0.0) || !std::isfinite(ed.length))
                throw std::invalid_argument("finite edge needs a positive finite length");
            in_[*ed.to].push_back(e);
        } else if (std::isfinite(ed.length)) {
            throw std::invalid_argument("ray with finite length");
        }
        out_[ed.from].push_back(e);
    }
    // connectivity by union of adjacency
    std::vector<std::size_t> parent(vertex_count_);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const Edge& ed : edges_)
        if (ed.to) parent[find(ed.from)] = find(*ed.to);
    for (std::size_t v = 0; v < vertex_count_; ++v)
        if (find(v) != find(0)) throw std::invalid_argument("graph is not connected");
}

GraphBuild build_star(int N, double L, double h) {
    if (N < 2) throw std::invalid_argument("star needs N >= 2 edges");
    check_grid(L, h);
    std::vector<Edge> edges(static_cast<std::size_t>(N));
    GraphGrid grid;
    grid.truncation = L;
    std::size_t n = grid_count(L, h, "L");
    for (auto& e : edges) {
        e.from = 0;
        grid.spacing.push_back(h);
        grid.samples.push_back(n);
        grid.offset.push_back(0.0);
    }
    return {MetricGraph(1, std::move(edges)), std::move(grid)};
}

GraphBuild build_regular_tree(const std::vector<double>& lengths, const std::vector<int>& degrees,
                              double L, double h) {
    if (degrees.empty()) throw std::invalid_argument("empty degree list");
    if (degrees.size() != lengths.size() + 1)
        throw std::invalid_argument("need one more degree than generation lengths");
    for (double l : lengths)
        if (!(l > 0.0)) throw std::invalid_argument("generation lengths must be positive");
    for (int d : degrees)
        if (d < 1) throw std::invalid_argument("degrees must be >= 1");
    check_grid(L, h);

    TreeMetadata meta{lengths, degrees};
    std::vector<Edge> edges;
    GraphGrid grid;
    grid.truncation = L;

    // frontier: (vertex id, address) of the current generation of vertices
    std::vector<std::pair<std::size_t, std::vector<int>>> frontier{{0, {}}};
    std::size_t next_vertex = 1;
    const int n = static_cast<int>(lengths.size());
    for (int gen = 1; gen <= n + 1; ++gen) {
        std::vector<std::pair<std::size_t, std::vector<int>>> children;
        bool last = gen == n + 1;
        for (const auto& [v, addr] : frontier) {
            for (int b = 1; b <= degrees[gen - 1]; ++b) {
                Edge e;
                e.from = v;
                e.multi_index = addr;
                e.multi_index.push_back(b);
                if (!last) {
                    e.to = next_vertex;
                    e.length = lengths[gen - 1];
                    children.emplace_back(next_vertex++, e.multi_index);
                    grid.samples.push_back(grid_count(e.length, h, "generation length"));
                } else {
                    grid.samples.push_back(grid_count(L, h, "L"));
                }
                grid.spacing.push_back(h);
                grid.offset.push_back(meta.breakpoint(gen - 1));
                edges.push_back(std::move(e));
            }
        }
        frontier = std::move(children);
    }
    return {MetricGraph(next_vertex, std::move(edges), std::move(meta)), std::move(grid)};
}

GraphState sample_state(const GraphBuild& g, const EdgeFunction& f, double time) {
    GraphState s{g.graph, g.grid, {}, time};
    s.values.resize(g.graph.edge_count());
    for (std::size_t e = 0; e < g.graph.edge_count(); ++e) {
        s.values[e].resize(g.grid.samples[e]);
        for (std::size_t i = 0; i < g.grid.samples[e]; ++i) s.values[e][i] = f(e, g.grid.coordinate(e, i));
    }
    return s;
}

namespace {

// outward derivative at local coordinate 0, 4th order when possible
cplx derivative_at_start(const std::vector<cplx>& u, double h) {
    if (u.size() >= 5) return (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) / (12.0 * h);
    if (u.size() >= 3) return (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    return (u[1] - u[0]) / h;
}

cplx derivative_at_end(const std::vector<cplx>& u, double h) {
    std::size_t n = u.size() - 1;
    if (u.size() >= 5)
        return (25.0 * u[n] - 48.0 * u[n - 1] + 36.0 * u[n - 2] - 16.0 * u[n - 3] + 3.0 * u[n - 4]) / (12.0 * h);
    if (u.size() >= 3) return (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h);
    return (u[n] - u[n - 1]) / h;
}

}  // namespace

KirchhoffResidual kirchhoff_residual(const GraphState& s) {
    KirchhoffResidual r;
    const MetricGraph& g = s.graph;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        std::vector<cplx> vals;
        cplx flux = 0.0;
        for (std::size_t e : g.outgoing(v)) {
            vals.push_back(s.values[e].front());
            flux -= derivative_at_start(s.values[e], s.grid.spacing[e]);
        }
        for (std::size_t e : g.incoming(v)) {
            vals.push_back(s.values[e].back());
            flux += derivative_at_end(s.values[e], s.grid.spacing[e]);
        }
        for (std::size_t i = 0; i < vals.size(); ++i)
            for (std::size_t j = i + 1; j < vals.size(); ++j)
                r.continuity = std::max(r.continuity, std::abs(vals[i] - vals[j]));
        r.flux = std::max(r.flux, std::abs(flux));
    }
    return r;
}

double weighted_l2_norm(const GraphState& s, double gamma) {
    constexpr double log_overflow = 700.0;
    double max_log = -kInfinity;
    std::vector<std::vector<double>> logs(s.values.size());
    for (std::size_t e = 0; e < s.values.size(); ++e) {
        const auto& u = s.values[e];
        logs[e].resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            double a = std::abs(u[i]);
            if (a == 0.0) {
                logs[e][i] = -kInfinity;
                continue;
            }
            double x = s.grid.offset[e] + s.grid.coordinate(e, i);
            double lt = 2.0 * gamma * x * x + 2.0 * std::log(a);
            if (lt > log_overflow)
                throw NumericalGuard("weighted norm overflows: exponent " + std::to_string(lt));
            logs[e][i] = lt;
            max_log = std::max(max_log, lt);
        }
    }
    if (max_log == -kInfinity) return 0.0;

    if (gamma > 0.0) {
        for (std::size_t e = 0; e < s.values.size(); ++e) {
            if (!s.graph.edge(e).infinite()) continue;
            std::size_t n = logs[e].size();
            std::size_t tail = std::max<std::size_t>(1, n / 20);
            for (std::size_t i = n - tail; i < n; ++i)
                if (logs[e][i] > max_log + std::log(1e-10))
                    throw NumericalGuard("weighted integrand does not decay towards the truncation point");
        }
    }

    double sum = 0.0;
    for (std::size_t e = 0; e < s.values.size(); ++e) {
        double h = s.grid.spacing[e];
        std::size_t n = logs[e].size();
        for (std::size_t i = 0; i < n; ++i) {
            double w = (i == 0 || i + 1 == n) ? 0.5 * h : h;
            sum += w * std::exp(logs[e][i] - max_log);
        }
    }
    return std::exp(0.5 * max_log) * std::sqrt(sum);
}

// ---- specs

namespace detail {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
        if (!ok) throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
    }
}

GraphSpec graph_spec_from_json(const nlohmann::json& j) {
    GraphSpec s;
    try {
        s.type = j.at("type").get<std::string>();
        if (s.type == "star") {
            reject_unknown_keys(j, {"type", "N", "L", "h"}, "graph");
            s.N = j.at("N").get<int>();
        } else if (s.type == "regular_tree") {
            reject_unknown_keys(j, {"type", "lengths", "degrees", "L", "h"}, "graph");
            s.lengths = j.at("lengths").get<std::vector<double>>();
            s.degrees = j.at("degrees").get<std::vector<int>>();
        } else if (s.type == "line_sigma") {
            reject_unknown_keys(j, {"type", "a", "l", "L", "h"}, "graph");
            s.a = j.at("a").get<std::vector<double>>();
            s.l = j.at("l").get<double>();
        } else {
            throw std::invalid_argument("graph: unknown type '" + s.type + "'");
        }
        s.L = j.at("L").get<double>();
        s.h = j.at("h").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("graph: ") + e.what());
    }
    return s;
}

nlohmann::json graph_spec_to_json(const GraphSpec& s) {
    nlohmann::json j;
    j["type"] = s.type;
    if (s.type == "star") {
        j["N"] = s.N;
    } else if (s.type == "regular_tree") {
        j["lengths"] = s.lengths;
        j["degrees"] = s.degrees;
    } else if (s.type == "line_sigma") {
        j["a"] = s.a;
        j["l"] = s.l;
    }
    j["L"] = s.L;
    j["h"] = s.h;
    return j;
}

}  // namespace detail

GraphSpec parse_graph_spec(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("graph spec: ") + e.what());
    }
    return detail::graph_spec_from_json(j);
}

std::string serialize_graph_spec(const GraphSpec& spec) { return detail::graph_spec_to_json(spec).dump(2); }

GraphBuild build_graph(const GraphSpec& spec) {
    if (spec.type == "star") return build_star(spec.N, spec.L, spec.h);
    if (spec.type == "regular_tree") return build_regular_tree(spec.lengths, spec.degrees, spec.L, spec.h);
    throw std::invalid_argument("graph type '" + spec.type + "' is not a metric graph");
}

}  // namespace qgraph

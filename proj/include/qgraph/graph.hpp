#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qgraph/types.hpp"

namespace qgraph {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Edge {
    std::size_t from = 0;
    std::optional<std::size_t> to;  // empty for an infinite edge (a ray)
    double length = kInfinity;
    std::vector<int> multi_index;   // tree address (1-based entries); empty on stars

    bool infinite() const { return !to.has_value(); }
    int generation() const { return static_cast<int>(multi_index.size()); }
};

struct TreeMetadata {
    std::vector<double> lengths;  // l_1..l_n
    std::vector<int> degrees;     // d_1..d_{n+1}

    int generations() const { return static_cast<int>(lengths.size()); }
    // a_k = l_1 + ... + l_k, a_0 = 0
    double breakpoint(int k) const;
};

class MetricGraph {
public:
    MetricGraph(std::size_t vertex_count, std::vector<Edge> edges,
                std::optional<TreeMetadata> tree = std::nullopt);

    std::size_t vertex_count() const { return vertex_count_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(std::size_t e) const { return edges_.at(e); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::optional<TreeMetadata>& tree() const { return tree_; }

    // edges leaving / entering vertex v
    const std::vector<std::size_t>& outgoing(std::size_t v) const { return out_.at(v); }
    const std::vector<std::size_t>& incoming(std::size_t v) const { return in_.at(v); }
    std::size_t degree(std::size_t v) const { return out_.at(v).size() + in_.at(v).size(); }

private:
    std::size_t vertex_count_;
    std::vector<Edge> edges_;
    std::optional<TreeMetadata> tree_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
};

struct GraphGrid {
    std::vector<double> spacing;        // h per edge
    std::vector<std::size_t> samples;   // sample count per edge (both endpoints included)
    std::vector<double> offset;         // distance of the initial vertex from the root
    double truncation = 0.0;            // L, for infinite edges

    double coordinate(std::size_t e, std::size_t i) const { return static_cast<double>(i) * spacing[e]; }
};

struct GraphState {
    MetricGraph graph;
    GraphGrid grid;
    std::vector<std::vector<cplx>> values;
    double time = 0.0;
};

struct KirchhoffResidual {
    double continuity = 0.0;
    double flux = 0.0;
};

struct GraphBuild {
    MetricGraph graph;
    GraphGrid grid;
};

GraphBuild build_star(int N, double L, double h);
GraphBuild build_regular_tree(const std::vector<double>& lengths, const std::vector<int>& degrees,
                              double L, double h);

// f(edge, local coordinate) sampled on every edge.
using EdgeFunction = std::function<cplx(std::size_t, double)>;
GraphState sample_state(const GraphBuild& g, const EdgeFunction& f, double time = 0.0);

KirchhoffResidual kirchhoff_residual(const GraphState& state);

// sqrt(sum_e int e^{2 gamma x^2} |u^e|^2 dx), x the distance from the root
// (from the centre on a star). Throws NumericalGuard on overflow or when
// the weighted integrand does not decay towards the truncation point.
double weighted_l2_norm(const GraphState& state, double gamma);

// Graph specification documents.
struct GraphSpec {
    std::string type;              // star | regular_tree | line_sigma
    int N = 0;                     // star
    std::vector<double> lengths;   // regular_tree
    std::vector<int> degrees;      // regular_tree
    std::vector<double> a;         // line_sigma
    double l = 0.0;                // line_sigma
    double L = 0.0;
    double h = 0.0;

    bool operator==(const GraphSpec&) const = default;
};

GraphSpec parse_graph_spec(const std::string& text);
std::string serialize_graph_spec(const GraphSpec& spec);
GraphBuild build_graph(const GraphSpec& spec);  // star and regular_tree only

}  // namespace qgraph

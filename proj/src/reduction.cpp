#include "qgraph/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace qgraph {

std::vector<LineSamples> star_sum(const GraphState& s, StarMode mode) {
    const MetricGraph& g = s.graph;
    if (g.vertex_count() != 1 || g.edge_count() < 2) throw std::invalid_argument("star_sum needs a star graph");
    const std::size_t n = s.values.front().size();
    const double h = s.grid.spacing.front();
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        if (s.values[e].size() != n || s.grid.spacing[e] != h)
            throw std::invalid_argument("star edges carry different grids");

    std::vector<cplx> S(n, 0.0);
    for (const auto& row : s.values)
        for (std::size_t i = 0; i < n; ++i) S[i] += row[i];

    auto extend = [&](const std::vector<cplx>& f, double parity) {
        LineSamples line;
        line.time = s.time;
        for (std::size_t i = n - 1; i > 0; --i) {
            line.x.push_back(-s.grid.coordinate(0, i));
            line.u.push_back(parity * f[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            line.x.push_back(s.grid.coordinate(0, i));
            line.u.push_back(f[i]);
        }
        return line;
    };

    if (mode == StarMode::even) return {extend(S, 1.0)};
    std::vector<LineSamples> out;
    const double N = static_cast<double>(g.edge_count());
    for (const auto& row : s.values) {
        std::vector<cplx> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = row[i] - S[i] / N;
        out.push_back(extend(d, -1.0));
    }
    return out;
}

namespace {

const TreeMetadata& tree_of(const GraphState& s) {
    if (!s.graph.tree()) throw std::invalid_argument("state does not live on a regular tree");
    return *s.graph.tree();
}

bool has_prefix(const std::vector<int>& v, const std::vector<int>& prefix) {
    return v.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), v.begin());
}

// Average over the descendants of alpha (or over everything when alpha is empty),
// on generations gen_from..n+1, as one line in root coordinates.
LineSamples average_from(const GraphState& s, const std::vector<int>& alpha) {
    const TreeMetadata& meta = tree_of(s);
    const int n = meta.generations();
    const int k = static_cast<int>(alpha.size());
    LineSamples line;
    line.time = s.time;
    double divisor = 1.0;  // d_{k+1} ... d_gen
    for (int gen = std::max(k, 1); gen <= n + 1; ++gen) {
        if (gen > k) divisor *= meta.degrees[gen - 1];
        std::vector<cplx> acc;
        double h = 0.0;
        for (std::size_t e = 0; e < s.graph.edge_count(); ++e) {
            const Edge& ed = s.graph.edge(e);
            if (ed.generation() != gen || !has_prefix(ed.multi_index, alpha)) continue;
            if (acc.empty()) {
                acc.assign(s.values[e].size(), 0.0);
                h = s.grid.spacing[e];
            } else if (acc.size() != s.values[e].size() || h != s.grid.spacing[e]) {
                throw std::invalid_argument("misaligned grids within a generation");
            }
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s.values[e][i];
        }
        const double x0 = meta.breakpoint(gen - 1);
        // the junction node belongs to the parent side
        for (std::size_t i = line.x.empty() ? 0 : 1; i < acc.size(); ++i) {
            line.x.push_back(x0 + static_cast<double>(i) * h);
            line.u.push_back(acc[i] / divisor);
        }
    }
    return line;
}

}  // namespace

AveragedSums averaged_sums(const GraphState& s) {
    AveragedSums out;
    out.meta = tree_of(s);
    const int n = out.meta.generations();
    for (int k = 0; k <= n; ++k) out.breakpoints.push_back(out.meta.breakpoint(k));
    for (std::size_t e = 0; e < s.graph.edge_count(); ++e) {
        const Edge& ed = s.graph.edge(e);
        out.Z[ed.multi_index] = average_from(s, ed.multi_index);
    }
    out.root = average_from(s, {});
    return out;
}

std::size_t ReductionMap::interval_of(double x) const {
    // intervals k = 0..2n+1 separated by folded[k-1]
    auto it = std::upper_bound(folded.begin(), folded.end(), x);
    return static_cast<std::size_t>(it - folded.begin());
}

double ReductionMap::map(double x) const {
    std::size_t k = interval_of(x);
    if (k == 0) return b.front() + slope.front() * (x - folded.front());
    return b[k - 1] + slope[k] * (x - folded[k - 1]);
}

ReductionMap reduction_map(const TreeMetadata& meta) {
    const int n = meta.generations();
    if (meta.degrees.size() != static_cast<std::size_t>(n) + 1) throw std::invalid_argument("non-regular tree metadata");
    for (int d : meta.degrees)
        if (d < 1) throw std::invalid_argument("non-regular tree metadata");
    ReductionMap m;
    for (int k = n; k >= 1; --k) m.folded.push_back(-meta.breakpoint(k));
    m.folded.push_back(0.0);
    for (int k = 1; k <= n; ++k) m.folded.push_back(meta.breakpoint(k));

    // eta_k for k = 1..2n+1: 1/d_{n+2-k} left of 0, 1 at 0, d_{k-n} right of 0
    const int K = 2 * n + 1;
    m.slope.assign(static_cast<std::size_t>(K) + 1, 1.0);
    for (int k = 1; k <= K; ++k) {
        double eta = 1.0;
        if (k <= n) eta = 1.0 / meta.degrees[n + 1 - k];
        else if (k >= n + 2) eta = meta.degrees[k - n - 1];
        m.jump.push_back(eta);
        m.slope[k] = m.slope[k - 1] * eta;
    }
    for (double mu : m.slope) m.sigma.push_back(mu * mu);

    // b anchored at T(0) = 0, which is folded[n]
    m.b.assign(m.folded.size(), 0.0);
    for (int k = n + 1; k < K; ++k) m.b[k] = m.b[k - 1] + m.slope[k] * (m.folded[k] - m.folded[k - 1]);
    for (int k = n - 1; k >= 0; --k) m.b[k] = m.b[k + 1] - m.slope[k + 1] * (m.folded[k + 1] - m.folded[k]);
    return m;
}

LineSamples fold_to_line(const AveragedSums& sums, const ReductionMap& map) {
    const LineSamples& Z = sums.root;
    LineSamples w;
    w.time = Z.time;
    for (std::size_t i = Z.x.size() - 1; i > 0; --i) {
        w.x.push_back(map.map(-Z.x[i]));
        w.u.push_back(Z.u[i]);
    }
    for (std::size_t i = 0; i < Z.x.size(); ++i) {
        w.x.push_back(map.map(Z.x[i]));
        w.u.push_back(Z.u[i]);
    }
    return w;
}

LineMedium fold_medium(const LineSamples& w, const ReductionMap& map) {
    LineMedium m;
    m.x = w.x;
    m.sigma.resize(w.x.size() - 1);
    // breakpoints of the folded line are the b_k
    for (std::size_t i = 0; i + 1 < w.x.size(); ++i) {
        double mid = 0.5 * (w.x[i] + w.x[i + 1]);
        auto it = std::upper_bound(map.b.begin(), map.b.end(), mid);
        m.sigma[i] = map.sigma[static_cast<std::size_t>(it - map.b.begin())];
    }
    return m;
}

LineSamples difference_Z(const AveragedSums& sums, const std::vector<int>& alpha, int beta) {
    const int n = sums.meta.generations();
    const int k = static_cast<int>(alpha.size());
    if (k > n) throw std::out_of_range("|alpha| exceeds the number of vertex generations");
    if (beta < 1 || beta > sums.meta.degrees[k]) throw std::out_of_range("branch index out of range");
    std::vector<int> child = alpha;
    child.push_back(beta);
    auto it = sums.Z.find(child);
    if (it == sums.Z.end()) throw std::out_of_range("unknown multi-index");
    const LineSamples& zc = it->second;
    const LineSamples* zp = &sums.root;
    if (k > 0) {
        auto jt = sums.Z.find(alpha);
        if (jt == sums.Z.end()) throw std::out_of_range("unknown multi-index");
        zp = &jt->second;
    }
    // zp covers J_alpha, zc covers J_{alpha beta}; zc starts at a_k
    LineSamples d = zc;
    std::size_t off = zp->x.size() - zc.x.size();
    for (std::size_t i = 0; i < zc.x.size(); ++i) {
        if (std::abs(zp->x[off + i] - zc.x[i]) > 1e-9) throw std::invalid_argument("misaligned grids");
        d.u[i] = zc.u[i] - zp->u[off + i];
    }
    return d;
}

void write_reduction_csv(std::ostream& os, const ReductionMap& m) {
    os.precision(17);
    os << "k,a_tilde,b,slope,sigma\n";
    for (std::size_t k = 0; k < m.slope.size(); ++k) {
        os << k << ',';
        if (k == 0) os << "-inf,-inf,";
        else os << m.folded[k - 1] << ',' << m.b[k - 1] << ',';
        os << m.slope[k] << ',' << m.sigma[k] << '\n';
    }
}

}  // namespace qgraph

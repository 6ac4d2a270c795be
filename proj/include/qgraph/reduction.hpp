#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "qgraph/evolution.hpp"
#include "qgraph/graph.hpp"

namespace qgraph {

enum class StarMode { even, odd_difference };

// even: one line, the sum S of all components extended evenly.
// odd_difference: one line per edge, u_k - S/N extended oddly.
std::vector<LineSamples> star_sum(const GraphState& state, StarMode mode);

struct AveragedSums {
    TreeMetadata meta;
    std::vector<double> breakpoints;                 // a_0 = 0, a_1, ..., a_n
    std::map<std::vector<int>, LineSamples> Z;       // Z^alpha on J_alpha, x measured from the root
    LineSamples root;                                // Z on (0, a_n + L)
};

AveragedSums averaged_sums(const GraphState& state);

struct ReductionMap {
    std::vector<double> folded;  // a~_1..a~_{2n+1} = -a_n, ..., -a_1, 0, a_1, ..., a_n
    std::vector<double> slope;   // mu_k on (a~_k, a~_{k+1}), k = 0..2n+1
    std::vector<double> jump;    // eta_k at a~_k, k = 1..2n+1 (mu_k = eta_k mu_{k-1})
    std::vector<double> b;       // images T(a~_k), k = 1..2n+1, anchored at T(0) = 0
    std::vector<double> sigma;   // slope^2 per interval

    double sigma_minus() const { return sigma.front(); }
    double sigma_plus() const { return sigma.back(); }
    std::size_t interval_of(double x) const;
    double map(double x) const;
};

ReductionMap reduction_map(const TreeMetadata& meta);

// w(T(x)) = v(x) with v the even extension of the root average.
LineSamples fold_to_line(const AveragedSums& sums, const ReductionMap& map);
// Coefficient sigma on the cells of a folded grid.
LineMedium fold_medium(const LineSamples& w, const ReductionMap& map);

// Z^{alpha beta} - Z^alpha on J_{|alpha|+1}; alpha empty means the root average.
LineSamples difference_Z(const AveragedSums& sums, const std::vector<int>& alpha, int beta);

void write_reduction_csv(std::ostream& os, const ReductionMap& map);

}  // namespace qgraph

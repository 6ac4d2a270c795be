#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <vector>

#include "qgraph/types.hpp"

namespace qgraph {

using Rational = boost::rational<long long>;

struct AlphaVectors {
    int N = 0;
    std::vector<std::vector<Rational>> exact;  // exact[k][j] = alpha^{k+1}_{j+1}

    double value(int k, int j) const { return boost::rational_cast<double>(exact.at(k).at(j)); }
};

// alpha^1 as prescribed for even / odd N; alpha^k is alpha^{k-1} rotated right by one slot.
AlphaVectors alpha_vectors(int N);

struct AlphaInvariants {
    bool vector_sums_zero = false;     // sum_j alpha^k_j = 0 for every k
    bool slot_sums_zero = false;       // sum_k alpha^k_j = 0 for every j
    bool square_sums_constant = false; // sum_k (alpha^k_j)^2 independent of j
    bool min_abs_at_least_one = false;
    bool max_abs_is_two_gamma = false; // max |alpha^k_j| = 2 gamma_Gamma(N)

    bool all() const {
        return vector_sums_zero && slot_sums_zero && square_sums_constant && min_abs_at_least_one &&
               max_abs_is_two_gamma;
    }
};
AlphaInvariants check_alpha_invariants(const AlphaVectors& av);

struct WeightParams {
    double mu = 1.0;
    double eps = 0.5;
    double R = 4.0;
};

// phi(t, x) = mu (alpha x + R t(1-t))^2 - (1+eps) R^2 t(1-t) / (16 mu)
double carleman_phi(const WeightParams& w, double alpha, double t, double x);
double carleman_phi_x(const WeightParams& w, double alpha, double t, double x);

// Smooth compactly supported members of Z_comp on a star with N edges,
// supported in (0,1) x [0, support]. All derivatives are analytic.
class ZcompSample {
public:
    struct Term {
        cplx coeff;
        double omega;   // time profile coeff * e^{i omega t} b(t)
        int kind;       // 0: chi(x/X), 1: x chi(x/X), 2: chi((x - centre)/width)
        double centre = 0.0, width = 1.0;
    };

    ZcompSample(int N, double support, std::vector<std::vector<Term>> terms);

    int N() const { return N_; }
    double support() const { return support_; }
    const std::vector<std::vector<Term>>& terms() const { return terms_; }

    cplx q(int j, double t, double x) const;
    cplx q_t(int j, double t, double x) const;
    cplx q_x(int j, double t, double x) const;
    cplx q_xx(int j, double t, double x) const;
    ZcompSample scaled(cplx c) const;

private:
    int N_;
    double support_;
    std::vector<std::vector<Term>> terms_;
};

// budget: number of edge-local bumps per edge.
ZcompSample sample_zcomp(int N, std::uint64_t seed, int budget = 3, double support = 2.0);
ZcompSample zero_zcomp(int N, double support = 2.0);

struct CarlemanSides {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;          // rhs - lhs
    double error_estimate = 0.0;  // from a half-resolution rerun
    double max_phi = 0.0;
};

// Composite Simpson on [0,1] x [0, support]; node counts of the form 4m+1 so the
// error estimate can reuse every other node.
CarlemanSides carleman_sides(const ZcompSample& q, const WeightParams& w, const AlphaVectors& av,
                             int t_nodes = 201, int x_nodes = 401);
std::vector<CarlemanSides> carleman_sides(const ZcompSample& q, const std::vector<WeightParams>& params,
                                          const AlphaVectors& av, int t_nodes = 201, int x_nodes = 401);

}  // namespace qgraph

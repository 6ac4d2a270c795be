#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "qgraph/graph.hpp"
#include "qgraph/types.hpp"

namespace qgraph {

struct EvolutionConfig {
    double dt = 1e-3;
    // Abort with NumericalGuard when the mass fraction in the outer 20% of a
    // truncated ray exceeds guard_tolerance.
    bool guard_boundary = false;
    double guard_tolerance = 1e-6;
};

// sigma = a_i^{-2} on I_i, with I_1 = (-inf, 0), I_j = ((j-2)l, (j-1)l), I_N = ((N-2)l, inf).
class PiecewiseCoefficient {
public:
    PiecewiseCoefficient(std::vector<double> a, double l);

    std::size_t pieces() const { return a_.size(); }
    const std::vector<double>& values() const { return a_; }
    double a(std::size_t i) const { return a_.at(i - 1); }  // 1-based, as in I_i
    double spacing() const { return l_; }
    double sigma(std::size_t i) const { return 1.0 / (a(i) * a(i)); }
    double sigma_minus() const { return sigma(1); }
    double sigma_plus() const { return sigma(pieces()); }
    // l_j = (j-1) l for j = 1..N-1
    double breakpoint(std::size_t j) const { return static_cast<double>(j - 1) * l_; }
    std::size_t piece_of(double x) const;

private:
    std::vector<double> a_;
    double l_;
};

// A truncated line with Dirichlet ends: nodes x and one coefficient per cell.
struct LineMedium {
    std::vector<double> x;
    std::vector<double> sigma;  // sigma[i] on (x[i], x[i+1])
};

// Uniform grid on [-L, (N-2)l + L] containing every breakpoint.
LineMedium line_medium(const PiecewiseCoefficient& sigma, double L, double h);
LineSamples sample_line(const std::vector<double>& x, const std::function<cplx(double)>& f, double time = 0.0);

GraphState evolve_graph(const GraphState& u0, double t_final, const EvolutionConfig& cfg);
LineSamples evolve_line(const LineSamples& u0, const LineMedium& medium, double t_final, const EvolutionConfig& cfg);
LineSamples evolve_line_sigma(const LineSamples& u0, const PiecewiseCoefficient& sigma, double t_final,
                              const EvolutionConfig& cfg);

using EdgePotential = std::function<double(std::size_t edge, double x)>;
using EdgeTimePotential = std::function<cplx(std::size_t edge, double t, double x)>;

// u_t = i (Delta + V1 + V2) u by Strang splitting around the Crank-Nicolson step.
// Either potential may be empty.
GraphState evolve_graph_potential(const GraphState& u0, const EdgePotential& V1, const EdgeTimePotential& V2,
                                  double t_final, const EvolutionConfig& cfg);

// Fraction of the L2 norm carried by the outer 20% of the truncated rays.
double tail_fraction(const GraphState& s);
// Same for a line whose rays are (x.front(), inner_lo) and (inner_hi, x.back()).
double tail_fraction(const LineSamples& s, double inner_lo, double inner_hi);

// CSV: header line "# t=..,h=..,dt=..,L=..", then edge_id,x,re_u,im_u.
void write_checkpoint(std::ostream& os, const GraphState& s, double dt);

}  // namespace qgraph

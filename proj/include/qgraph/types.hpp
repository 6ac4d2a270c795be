#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgraph {

using cplx = std::complex<double>;

// Raised when a computation would produce garbage: overflow of an exponential
// weight, a wavefront reaching the truncation boundary, a vanishing denominator.
class NumericalGuard : public std::runtime_error {
public:
    explicit NumericalGuard(const std::string& what) : std::runtime_error(what) {}
};

// Samples of a function on (a truncated piece of) the real line.
// x is strictly increasing; spacing may vary.
struct LineSamples {
    std::vector<double> x;
    std::vector<cplx> u;
    double time = 0.0;

    std::size_t size() const { return x.size(); }
};

double l2_norm(const LineSamples& f);
// Relative L2 distance ||f - g|| / ||g|| on the common grid (grids must match).
double relative_l2_error(const LineSamples& f, const LineSamples& g);
// Restrict to lo <= x <= hi.
LineSamples restrict_to(const LineSamples& f, double lo, double hi);

}  // namespace qgraph

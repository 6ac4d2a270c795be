#pragma once

#include <functional>
#include <string>

#include "qgraph/graph.hpp"
#include "qgraph/types.hpp"

namespace qgraph {

enum class Side { negative, positive, both };

struct DecayFit {
    double rate = 0.0;       // fitted alpha in |u| ~ C exp(-alpha x^2)
    double intercept = 0.0;  // log C
    double lo = 0.0, hi = 0.0;
    double residual = 0.0;   // RMS of the log-fit
    Side side = Side::both;
    std::size_t samples = 0;
    bool identically_zero = false;
};

// Least squares of log|u| against x^2 over lo <= |x| <= hi on the chosen side.
// Samples below 1e-13 max|u| are treated as noise and skipped.
DecayFit fit_gaussian_decay(const LineSamples& f, Side side, double lo, double hi);
// Default window [0.4 L, 0.8 L].
DecayFit fit_gaussian_decay(const LineSamples& f, Side side, double L);
// One edge of a graph state as a line in root coordinates.
LineSamples edge_samples(const GraphState& s, std::size_t edge);

double gamma_Gamma(int N);

struct ThresholdContext {
    enum class Kind { line_sigma, star_free, star_potential };
    Kind kind = Kind::star_free;
    int line_case = 3;          // 1, 2 or 3 for the piecewise-constant line
    double sigma_minus = 1.0;
    double sigma_plus = 1.0;
    int N = 2;                  // star with potential
    double band = 0.05;         // relative width of the boundary band
};

enum class Regime { above, below, boundary };
std::string to_string(Regime r);

struct ThresholdVerdict {
    double product = 0.0;
    double threshold = 0.0;
    Regime regime = Regime::below;
    std::string rule;
};

ThresholdVerdict classify_threshold(double alpha, double beta, const ThresholdContext& ctx);

struct SharpExample {
    std::function<cplx(double)> u0;  // initial data (per edge on a star, on the line otherwise)
    std::function<cplx(double)> u1;  // closed-form solution at t = 1
    double alpha = 0.0;
    double beta = 0.0;
};

SharpExample sharp_example_star(double alpha, int N);
SharpExample sharp_example_two_step(double a1, double a2);

struct AppellParams {
    double alpha = 1.0, beta = 1.0;
    double A = 0.0, B = 1.0;
};
enum class Direction { forward, inverse };
using SliceFamily = std::function<cplx(double t, double x)>;

// s(t) = sqrt(beta) t / (sqrt(alpha)(1-t) + sqrt(beta) t)
double appell_time(double t, const AppellParams& p);
SliceFamily appell_transform(SliceFamily u, const AppellParams& p, Direction d);
// c with ||e^{gamma x^2} u~(t)|| = ||e^{c y^2} u(s)||
double appell_norm_exponent(double t, double gamma, const AppellParams& p);

}  // namespace qgraph

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <vector>

#include "qgraph/evolution.hpp"
#include "qgraph/exp_polynomial.hpp"
#include "qgraph/types.hpp"

namespace qgraph {

// Junction data for sigma = a_i^{-2}; junctions are numbered j = 1..N-1.
struct LayerParams {
    std::vector<double> a;
    double l = 1.0;
    std::vector<double> delta, eps, gamma;  // index j-1

    std::size_t N() const { return a.size(); }
    double aj(std::size_t j) const { return a.at(j - 1); }
    double delta_j(std::size_t j) const { return delta.at(j - 1); }
    double eps_j(std::size_t j) const { return eps.at(j - 1); }
    double gamma_j(std::size_t j) const { return gamma.at(j - 1); }
    cplx lambda(std::size_t j, double xi) const;
    cplx mu(std::size_t j, double xi) const;
};

LayerParams layer_params(const std::vector<double>& a, double l);

Eigen::Matrix2cd transfer_matrix(std::size_t j, double xi, const LayerParams& p);
// T_j . T_{j-1} ... T_k  (conjugated matrices), k <= j
Eigen::Matrix2cd chain_product(std::size_t j, std::size_t k, double xi, const LayerParams& p);

struct EFPair {
    ExpPolynomial E;   // sign +
    ExpPolynomial Ft;  // sign -
};
EFPair ef_recursion(std::size_t j, std::size_t k, const LayerParams& p);

// (eps_k ... eps_j) / (2^{j-k+1} a_k ... a_j)
double chain_prefactor(std::size_t j, std::size_t k, const LayerParams& p);
// Entries (2,1) and (2,2) of the chain product written through E and F~.
std::pair<cplx, cplx> closed_form_entries(std::size_t j, std::size_t k, double xi, const LayerParams& p,
                                          const EFPair& ef);
// |A_{j,k}|^2 - |B_{j,k}|^2 as a product over the junctions
double determinant_product(std::size_t j, std::size_t k, const LayerParams& p);
// alpha_1 = 1, alpha_k = (eps_1..eps_{k-1})/(2^{k-1} a_1..a_{k-1}) (1-gamma_1^2)...(1-gamma_{k-1}^2)
double alpha_coefficient(std::size_t k, const LayerParams& p);

struct CoefficientPair {
    cplx minus;
    cplx plus;
};
CoefficientPair coefficients_C(std::size_t k, double xi, const LayerParams& p);

struct WienerSeries {
    ExpPolynomial series;          // approximates 1 / conj(E_{N-1,1}); sign -, indices >= 0
    int K = 0;
    double rho = 0.0;              // max over levels of max over the grid of |F~_{j,1} / E_{j,1}|
    std::vector<double> level_rho; // levels j = 1..N-2
    double tail_bound = 0.0;       // rho^{K+1} / (1 - rho)
    std::size_t grid_points = 0;

    cplx operator()(double xi) const { return series(xi); }
};

std::vector<double> default_xi_grid(const LayerParams& p, std::size_t points);
WienerSeries invert_E(const LayerParams& p, int K, const std::vector<double>& xi_grid);
// max over the grid of |S_K(xi) conj(E_{N-1,1}(xi)) - 1|
double wiener_residual(const WienerSeries& s, const LayerParams& p, const std::vector<double>& xi_grid);
void write_series_csv(std::ostream& os, const WienerSeries& s, const LayerParams& p);

// k_t(x) = exp(i x^2 / 4t) / sqrt(4 pi i t), principal branch
cplx free_kernel(double t, double x);
cplx kernel_h(double t, double x, const WienerSeries& s);

struct KernelAtom {
    enum class Base { free, h };
    cplx weight;
    double scale;  // kernel argument is a_1 x - scale * y - shift
    double shift;
    Base base;
};

// p_t^{1,k}(x, y) as a list of atoms; k = 1..N
std::vector<KernelAtom> kernel_p1k_atoms(std::size_t k, const LayerParams& p);
cplx kernel_p1k(std::size_t k, double t, double x, double y, const LayerParams& p, const WienerSeries& s);

// One piece of eta: the map z = scale * y + shift carries u0 on (y_lo, y_hi) into eta.
// Contribution to u(t, x): weight * int_{y_lo}^{y_hi} k_t(a_1 x - scale y - shift) u0(y) dy.
struct EtaAtom {
    cplx weight;
    double scale;
    double shift;
    double y_lo, y_hi;

    double image_lo() const;
    double image_hi() const;
};

struct EtaProfile {
    double outer = 1.0;          // u(t, x) = (k_t * eta)(outer * x)
    std::vector<EtaAtom> atoms;  // atoms[0] is the transported copy of u0 on (-inf, 0)

    cplx operator()(double z, const std::function<cplx(double)>& u0) const;
};

EtaProfile eta_profile(const LayerParams& p, const WienerSeries& s);

// (k_t * eta)(a_1 x) with eta built from the sampled u0 by trapezoid quadrature.
// u0.x must contain every breakpoint.
LineSamples convolve_profile(const EtaProfile& eta, const LineSamples& u0, double t, const std::vector<double>& x);

enum class Assembly { kernels, eta };

struct HalflineSolution {
    LineSamples u;
    EtaProfile eta;
};

HalflineSolution solve_negative_halfline(const LineSamples& u0, const PiecewiseCoefficient& sigma, double t,
                                         const std::vector<double>& x, const WienerSeries& s,
                                         Assembly how = Assembly::eta);

struct TwoStepProfiles {
    EtaProfile psi;        // u(t, x) = (k_t * psi)(a_1 x), x < 0
    EtaProfile psi_tilde;  // u(t, x) = (k_t * psi_tilde)(a_2 x), x > 0
};
TwoStepProfiles two_step_psi(double a1, double a2);
// u(t, x) on the whole line from the two profiles
LineSamples two_step_solution(const TwoStepProfiles& prof, const LineSamples& u0, double t,
                              const std::vector<double>& x);

}  // namespace qgraph

#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cstddef>
#include <vector>

#include "qgraph/types.hpp"

namespace qgraph::detail {

// Lumped-mass discretisation of a Laplacian on a network of nodes:
// (K u)_i = sum_links c (u_j - u_i), mass m_i. Dirichlet nodes are not unknowns.
struct Network {
    struct Link {
        std::size_t i, j;
        double c;
    };
    std::vector<double> mass;
    std::vector<Link> links;

    std::size_t size() const { return mass.size(); }
};

// (M - i dt/2 K) u^{n+1} = (M + i dt/2 K) u^n
class CrankNicolson {
public:
    CrankNicolson(const Network& net, double dt);
    void step(Eigen::VectorXcd& u) const;

private:
    Eigen::SparseMatrix<cplx> rhs_;
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu_;
};

std::size_t step_count(double t_final, double dt);

}  // namespace qgraph::detail

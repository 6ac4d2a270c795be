#pragma once

#include <map>
#include <vector>

#include "qgraph/types.hpp"

namespace qgraph {

// Finite sums  sum_n c_n exp(sign * 2 i xi l (n . a))  with integer multi-indices n.
// The index vector has one slot per layer value a_1..a_N.
class ExpPolynomial {
public:
    using Index = std::vector<int>;

    ExpPolynomial(std::vector<double> a, double l, int sign = +1);
    static ExpPolynomial constant(std::vector<double> a, double l, cplx c, int sign = +1);
    // c * exp(sign * 2 i xi l (a_from + ... + a_to)), 1-based inclusive; empty range -> c
    static ExpPolynomial monomial(std::vector<double> a, double l, cplx c, std::size_t from, std::size_t to,
                                  int sign = +1);

    const std::map<Index, cplx>& terms() const { return terms_; }
    const std::vector<double>& a() const { return a_; }
    double spacing() const { return l_; }
    int sign() const { return sign_; }
    std::size_t size() const { return terms_.size(); }
    cplx coefficient(const Index& n) const;

    cplx operator()(double xi) const;
    cplx at_zero() const;
    double abs_sum() const;

    ExpPolynomial conj() const;
    // Same function written with the opposite sign convention (indices negated).
    ExpPolynomial with_sign(int s) const;

    ExpPolynomial& operator+=(const ExpPolynomial& o);
    ExpPolynomial& operator*=(cplx c);
    ExpPolynomial operator*(const ExpPolynomial& o) const;
    ExpPolynomial operator+(const ExpPolynomial& o) const;
    ExpPolynomial operator-() const;

    // keep terms with total index weight <= K
    ExpPolynomial truncated(int K) const;
    void prune(double tol = 1e-16);

    static int weight(const Index& n);
    bool nonnegative() const;  // every index componentwise >= 0

private:
    void check_compatible(const ExpPolynomial& o) const;

    std::vector<double> a_;
    double l_;
    int sign_;
    std::map<Index, cplx> terms_;
};

}  // namespace qgraph

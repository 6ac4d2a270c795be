#include "qgraph/exp_polynomial.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qgraph {

ExpPolynomial::ExpPolynomial(std::vector<double> a, double l, int sign) : a_(std::move(a)), l_(l), sign_(sign) {
    if (sign_ != 1 && sign_ != -1) throw std::invalid_argument("sign must be +1 or -1");
}

ExpPolynomial ExpPolynomial::constant(std::vector<double> a, double l, cplx c, int sign) {
    ExpPolynomial p(std::move(a), l, sign);
    if (c != 0.0) p.terms_[Index(p.a_.size(), 0)] = c;
    return p;
}

ExpPolynomial ExpPolynomial::monomial(std::vector<double> a, double l, cplx c, std::size_t from, std::size_t to,
                                      int sign) {
    ExpPolynomial p(std::move(a), l, sign);
    if (c == 0.0) return p;
    Index n(p.a_.size(), 0);
    for (std::size_t i = from; i <= to; ++i) {
        if (i < 1 || i > n.size()) throw std::out_of_range("monomial index");
        n[i - 1] = 1;
    }
    p.terms_[n] = c;
    return p;
}

cplx ExpPolynomial::coefficient(const Index& n) const {
    auto it = terms_.find(n);
    return it == terms_.end() ? cplx(0.0) : it->second;
}

cplx ExpPolynomial::operator()(double xi) const {
    cplx s = 0.0;
    for (const auto& [n, c] : terms_) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n.size(); ++i) dot += n[i] * a_[i];
        s += c * std::polar(1.0, sign_ * 2.0 * xi * l_ * dot);
    }
    return s;
}

cplx ExpPolynomial::at_zero() const {
    cplx s = 0.0;
    for (const auto& kv : terms_) s += kv.second;
    return s;
}

double ExpPolynomial::abs_sum() const {
    double s = 0.0;
    for (const auto& kv : terms_) s += std::abs(kv.second);
    return s;
}

ExpPolynomial ExpPolynomial::conj() const {
    ExpPolynomial p(a_, l_, -sign_);
    for (const auto& [n, c] : terms_) p.terms_[n] = std::conj(c);
    return p;
}

ExpPolynomial ExpPolynomial::with_sign(int s) const {
    if (s == sign_) return *this;
    ExpPolynomial p(a_, l_, s);
    for (const auto& [n, c] : terms_) {
        Index m = n;
        for (int& v : m) v = -v;
        p.terms_[m] = c;
    }
    return p;
}

void ExpPolynomial::check_compatible(const ExpPolynomial& o) const {
    if (o.a_ != a_ || o.l_ != l_) throw std::invalid_argument("exponential polynomials over different layers");
}

ExpPolynomial& ExpPolynomial::operator+=(const ExpPolynomial& o) {
    check_compatible(o);
    const ExpPolynomial rhs = o.with_sign(sign_);
    for (const auto& [n, c] : rhs.terms_) {
        cplx& t = terms_[n];
        t += c;
        if (t == 0.0) terms_.erase(n);
    }
    return *this;
}

ExpPolynomial& ExpPolynomial::operator*=(cplx c) {
    if (c == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& kv : terms_) kv.second *= c;
    return *this;
}

ExpPolynomial ExpPolynomial::operator*(const ExpPolynomial& o) const {
    check_compatible(o);
    ExpPolynomial rhs = o.with_sign(sign_);
    ExpPolynomial p(a_, l_, sign_);
    for (const auto& [n, c] : terms_)
        for (const auto& [m, d] : rhs.terms_) {
            Index k(n.size());
            for (std::size_t i = 0; i < n.size(); ++i) k[i] = n[i] + m[i];
            p.terms_[k] += c * d;
        }
    p.prune(0.0);
    return p;
}

ExpPolynomial ExpPolynomial::operator+(const ExpPolynomial& o) const {
    ExpPolynomial p = *this;
    p += o;
    return p;
}

ExpPolynomial ExpPolynomial::operator-() const {
    ExpPolynomial p = *this;
    p *= -1.0;
    return p;
}

int ExpPolynomial::weight(const Index& n) { return std::accumulate(n.begin(), n.end(), 0); }

ExpPolynomial ExpPolynomial::truncated(int K) const {
    ExpPolynomial p(a_, l_, sign_);
    for (const auto& [n, c] : terms_)
        if (weight(n) <= K) p.terms_[n] = c;
    return p;
}

void ExpPolynomial::prune(double tol) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (std::abs(it->second) <= tol)
            it = terms_.erase(it);
        else
            ++it;
    }
}

bool ExpPolynomial::nonnegative() const {
    for (const auto& kv : terms_)
        for (int v : kv.first)
            if (v < 0) return false;
    return true;
}

}  // namespace qgraph

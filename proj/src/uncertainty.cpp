#include "qgraph/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qgraph {

namespace {

DecayFit fit_one(const LineSamples& f, Side side, double lo, double hi) {
    if (!(hi > lo) || lo < 0.0) throw std::invalid_argument("fit window must satisfy 0 <= lo < hi");
    DecayFit fit;
    fit.lo = lo;
    fit.hi = hi;
    fit.side = side;
    double peak = 0.0;
    for (cplx v : f.u) peak = std::max(peak, std::abs(v));
    const double floor = 1e-13 * peak;

    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::vector<std::pair<double, double>> pts;
    bool any_in_window = false;
    double window_peak = 0.0;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        double x = f.x[i];
        if (side == Side::negative && x > 0.0) continue;
        if (side == Side::positive && x < 0.0) continue;
        double r = std::abs(x);
        if (r < lo || r > hi) continue;
        any_in_window = true;
        double a = std::abs(f.u[i]);
        window_peak = std::max(window_peak, a);
        if (a <= floor || a == 0.0) continue;
        double X = x * x, Y = std::log(a);
        pts.emplace_back(X, Y);
        sw += 1.0;
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
    }
    if (any_in_window && window_peak == 0.0) {
        fit.identically_zero = true;
        fit.rate = std::numeric_limits<double>::quiet_NaN();
        return fit;
    }
    if (pts.size() < 20) throw std::invalid_argument("too few samples above the noise floor in the fit window");
    double det = sw * sxx - sx * sx;
    if (!(std::abs(det) > 0.0)) throw std::invalid_argument("degenerate fit window");
    double slope = (sw * sxy - sx * sy) / det;
    fit.intercept = (sy - slope * sx) / sw;
    fit.rate = -slope;
    fit.samples = pts.size();
    double ss = 0.0;
    for (auto [X, Y] : pts) {
        double e = Y - (fit.intercept + slope * X);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(pts.size()));
    return fit;
}

}  // namespace

DecayFit fit_gaussian_decay(const LineSamples& f, Side side, double lo, double hi) {
    if (side != Side::both) return fit_one(f, side, lo, hi);
    bool has_neg = std::any_of(f.x.begin(), f.x.end(), [](double x) { return x < 0.0; });
    bool has_pos = std::any_of(f.x.begin(), f.x.end(), [](double x) { return x > 0.0; });
    if (!has_neg) return fit_one(f, Side::positive, lo, hi);
    if (!has_pos) return fit_one(f, Side::negative, lo, hi);
    DecayFit n = fit_one(f, Side::negative, lo, hi);
    DecayFit p = fit_one(f, Side::positive, lo, hi);
    DecayFit r = n.identically_zero || (!p.identically_zero && p.rate < n.rate) ? p : n;
    r.residual = std::max(n.residual, p.residual);
    r.side = Side::both;
    return r;
}

DecayFit fit_gaussian_decay(const LineSamples& f, Side side, double L) {
    return fit_gaussian_decay(f, side, 0.4 * L, 0.8 * L);
}

LineSamples edge_samples(const GraphState& s, std::size_t e) {
    LineSamples l;
    l.time = s.time;
    for (std::size_t i = 0; i < s.values.at(e).size(); ++i) {
        l.x.push_back(s.grid.offset[e] + s.grid.coordinate(e, i));
        l.u.push_back(s.values[e][i]);
    }
    return l;
}

double gamma_Gamma(int N) {
    if (N < 2) throw std::invalid_argument("critical exponent needs N >= 2");
    if (N % 2 == 0) return 0.5;
    double m = (N - 1) / 2;
    return 0.5 * (m + 1.0) / m;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::above: return "above";
        case Regime::below: return "below";
        case Regime::boundary: return "boundary";
    }
    return "?";
}

ThresholdVerdict classify_threshold(double alpha, double beta, const ThresholdContext& ctx) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("decay rates must be positive");
    if (!(ctx.band >= 0.0)) throw std::invalid_argument("boundary band must be non-negative");
    ThresholdVerdict v;
    v.product = alpha * beta;
    using K = ThresholdContext::Kind;
    switch (ctx.kind) {
        case K::star_free:
            v.threshold = 1.0 / 16.0;
            v.rule = "tree-free: alpha*beta > 1/16";
            break;
        case K::star_potential: {
            double g = gamma_Gamma(ctx.N);
            v.threshold = 4.0 * g * g * g * g;
            v.rule = "star-potential: alpha*beta > 4 gamma^4";
            break;
        }
        case K::line_sigma: {
            double sm = ctx.sigma_minus, sp = ctx.sigma_plus;
            if (!(sm > 0.0) || !(sp > 0.0)) throw std::invalid_argument("sigma values must be positive");
            if (ctx.line_case == 1) {
                v.threshold = 1.0 / (16.0 * sm * sm);
                v.rule = "line case (i): alpha*beta > 1/(16 sigma_-^2)";
            } else if (ctx.line_case == 2) {
                v.threshold = 1.0 / (16.0 * sp * sp);
                v.rule = "line case (ii): alpha*beta > 1/(16 sigma_+^2)";
            } else if (ctx.line_case == 3) {
                v.threshold = 1.0 / (16.0 * std::max(sm * sm, sp * sp));
                v.rule = "line case (iii): alpha*beta > 1/(16 max(sigma_-^2, sigma_+^2))";
            } else {
                throw std::invalid_argument("line case must be 1, 2 or 3");
            }
            break;
        }
    }
    double rel = (v.product - v.threshold) / v.threshold;
    v.regime = std::abs(rel) <= ctx.band ? Regime::boundary : (rel > 0.0 ? Regime::above : Regime::below);
    return v;
}

SharpExample sharp_example_star(double alpha, int N) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (N < 2) throw std::invalid_argument("star needs N >= 2");
    SharpExample ex;
    ex.alpha = alpha;
    ex.beta = 1.0 / (16.0 * alpha);
    ex.u0 = [alpha](double x) { return std::exp(cplx(-alpha * x * x, -0.25 * x * x)); };
    const cplx pre = 1.0 / std::sqrt(cplx(0.0, 4.0 * alpha));
    ex.u1 = [alpha, pre](double x) { return pre * std::exp(cplx(-x * x / (16.0 * alpha), 0.25 * x * x)); };
    return ex;
}

SharpExample sharp_example_two_step(double a1, double a2) {
    if (!(a1 > 0.0) || !(a2 > 0.0)) throw std::invalid_argument("a1, a2 must be positive");
    SharpExample ex;
    ex.alpha = std::min(a1 * a1, a2 * a2);
    ex.beta = ex.alpha / 16.0;
    ex.u0 = [a1, a2](double x) {
        double a = x <= 0.0 ? a1 : a2;
        return std::exp(cplx(-a * a * x * x, -0.25 * a * a * x * x));
    };
    const cplx pre = 1.0 / std::sqrt(cplx(0.0, 4.0));
    ex.u1 = [a1, a2, pre](double x) {
        double a = x <= 0.0 ? a1 : a2;
        return pre * std::exp(cplx(-a * a * x * x / 16.0, 0.25 * a * a * x * x));
    };
    return ex;
}

namespace {

void check_appell(const AppellParams& p) {
    if (!(p.alpha > 0.0) || !(p.beta > 0.0)) throw std::invalid_argument("Appell rates must be positive");
    if (p.A == 0.0 && p.B == 0.0) throw std::invalid_argument("A + iB must not vanish");
}

}  // namespace

double appell_time(double t, const AppellParams& p) {
    check_appell(p);
    const double sa = std::sqrt(p.alpha), sb = std::sqrt(p.beta);
    return sb * t / (sa * (1.0 - t) + sb * t);
}

SliceFamily appell_transform(SliceFamily u, const AppellParams& p, Direction d) {
    check_appell(p);
    AppellParams q = p;
    if (d == Direction::inverse) std::swap(q.alpha, q.beta);
    const double sa = std::sqrt(q.alpha), sb = std::sqrt(q.beta);
    const double c = std::pow(q.alpha * q.beta, 0.25);
    const cplx Z(q.A, q.B);
    return [u = std::move(u), sa, sb, c, Z](double t, double x) {
        const double D = sa * (1.0 - t) + sb * t;
        const double s = sb * t / D;
        const cplx gauge = std::exp((sa - sb) * x * x / (4.0 * Z * D));
        return std::sqrt(c / D) * u(s, c * x / D) * gauge;
    };
}

double appell_norm_exponent(double t, double gamma, const AppellParams& p) {
    check_appell(p);
    const double sa = std::sqrt(p.alpha), sb = std::sqrt(p.beta);
    const double s = appell_time(t, p);
    const double den = sa * s + sb * (1.0 - s);
    return gamma * sa * sb / (den * den) + (sa - sb) * p.A / (4.0 * (p.A * p.A + p.B * p.B) * den);
}

}  // namespace qgraph

#include "qgraph/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "qgraph/evolution.hpp"
#include "qgraph/reduction.hpp"
#include "qgraph/transfer.hpp"
#include "qgraph/types.hpp"

namespace qgraph {

namespace fs = std::filesystem;

std::string provenance_header(const ExperimentConfig& cfg) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.hash()));
    return std::string("# ") + kToolVersion + " config=" + hash + " kind=" + to_string(cfg.kind) +
           " seed=" + std::to_string(cfg.seed) + "\n";
}

fs::path resolve_output_dir(const std::string& flag, const ExperimentConfig& cfg) {
    if (!flag.empty()) return flag;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("QGRAPH_OUT_DIR"); env && *env) return env;
    return "qgraph_out";
}

namespace {

// One CSV in memory; every number is written with round-trip precision.
class Table {
public:
    explicit Table(const std::string& columns) { os_ << std::setprecision(17) << columns << '\n'; }
    template <class... T>
    void row(const T&... v) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(v), first = false), ...);
        os_ << '\n';
    }
    std::string str() const { return os_.str(); }

private:
    template <class T>
    static auto cell(const T& v) {
        if constexpr (std::is_convertible_v<T, std::string>) {
            std::string s = v;
            if (s.find_first_of(",\"") == std::string::npos) return s;
            std::string q = "\"";
            for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            return q + "\"";
        } else {
            return v;
        }
    }
    std::ostringstream os_;
};

using Outputs = std::map<std::string, std::string>;

struct Check {
    std::string name;
    double value;
    double tolerance;
};

using LineFn = std::function<cplx(double)>;

LineFn load_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("initial: cannot open '" + path + "'");
    std::vector<std::array<double, 3>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::array<double, 3> r{};
        if (!(ls >> r[0] >> r[1] >> r[2])) {
            if (rows.empty()) continue;  // column header
            throw std::invalid_argument("initial: malformed row in '" + path + "'");
        }
        rows.push_back(r);
    }
    if (rows.size() < 2) throw std::invalid_argument("initial: '" + path + "' needs at least two rows");
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i][0] > rows[i - 1][0])) throw std::invalid_argument("initial: x must be increasing");
    return [rows](double x) -> cplx {
        if (x < rows.front()[0] || x > rows.back()[0]) return 0.0;
        auto it = std::lower_bound(rows.begin(), rows.end(), x,
                                   [](const std::array<double, 3>& r, double v) { return r[0] < v; });
        if (it == rows.begin()) return {(*it)[1], (*it)[2]};
        const auto& b = *it;
        const auto& a = *(it - 1);
        double w = (x - a[0]) / (b[0] - a[0]);
        return {a[1] + w * (b[1] - a[1]), a[2] + w * (b[2] - a[2])};
    };
}

LineFn initial_function(const ExperimentConfig& cfg) {
    const InitialSpec& s = cfg.initial;
    if (s.type == "file") return load_samples(s.path);
    const cplx rate(s.alpha, s.chirp);
    if (s.type == "piecewise") {
        PiecewiseCoefficient sig(cfg.graph->a, cfg.graph->l);
        return [rate, sig](double x) {
            double a = sig.a(sig.piece_of(x));
            return std::exp(-rate * a * a * x * x);
        };
    }
    return [rate](double x) { return std::exp(-rate * x * x); };
}

EvolutionConfig guarded(const ExperimentConfig& cfg) {
    EvolutionConfig e;
    e.dt = cfg.time.dt;
    e.guard_boundary = true;
    e.guard_tolerance = cfg.time.guard;
    return e;
}

PiecewiseCoefficient coefficient_of(const GraphSpec& g) { return PiecewiseCoefficient(g.a, g.l); }

std::string line_checkpoint(const LineSamples& u, const GraphSpec& g, double dt) {
    Table t("edge_id,x,re_u,im_u");
    std::ostringstream hdr;
    hdr << std::setprecision(17) << "# t=" << u.time << ",h=" << g.h << ",dt=" << dt << ",L=" << g.L << "\n";
    std::string head = hdr.str();
    for (std::size_t i = 0; i < u.size(); ++i) t.row(0, u.x[i], u.u[i].real(), u.u[i].imag());
    return head + t.str();
}

GraphState sample_graph(const GraphBuild& g, const LineFn& f) {
    return sample_state(g, [&](std::size_t e, double x) { return f(g.grid.offset[e] + x); });
}

double graph_norm(const GraphState& s) { return weighted_l2_norm(s, 0.0); }

// ---- kinds

void run_simulate(const ExperimentConfig& cfg, Outputs& out, std::vector<Check>& checks) {
    const GraphSpec& g = *cfg.graph;
    const LineFn f = initial_function(cfg);
    Table sum("t,norm0,norm1,rel_drift,tail_fraction,continuity,flux");
    double drift;
    if (g.type == "line_sigma") {
        LineMedium m = line_medium(coefficient_of(g), g.L, g.h);
        LineSamples u0 = sample_line(m.x, f);
        u0.u.front() = u0.u.back() = 0.0;
        LineSamples u1 = evolve_line(u0, m, cfg.time.t, guarded(cfg));
        double n0 = l2_norm(u0), n1 = l2_norm(u1);
        drift = std::abs(n1 - n0) / n0;
        double span = m.x.back() - m.x.front();
        sum.row(cfg.time.t, n0, n1, drift, tail_fraction(u1, m.x.front() + 0.2 * span, m.x.back() - 0.2 * span), 0.0,
                0.0);
        out["state.csv"] = line_checkpoint(u1, g, cfg.time.dt);
    } else {
        GraphBuild b = build_graph(g);
        GraphState s0 = sample_graph(b, f);
        GraphState s1 = evolve_graph(s0, cfg.time.t, guarded(cfg));
        double n0 = graph_norm(s0), n1 = graph_norm(s1);
        drift = std::abs(n1 - n0) / n0;
        KirchhoffResidual k = kirchhoff_residual(s1);
        sum.row(cfg.time.t, n0, n1, drift, tail_fraction(s1), k.continuity, k.flux);
        std::ostringstream os;
        write_checkpoint(os, s1, cfg.time.dt);
        out["state.csv"] = os.str();
        checks.push_back({"vertex continuity", k.continuity, 1e-12});
    }
    out["summary.csv"] = sum.str();
    checks.push_back({"norm drift", drift, 1e-8});
}

void run_kernel_compare(const ExperimentConfig& cfg, Outputs& out, std::vector<Check>& checks) {
    const GraphSpec& g = *cfg.graph;
    const KernelSpec& k = cfg.kernel;
    PiecewiseCoefficient sig = coefficient_of(g);
    LineMedium m = line_medium(sig, g.L, g.h);
    LineSamples u0 = sample_line(m.x, initial_function(cfg));
    u0.u.front() = u0.u.back() = 0.0;
    LineSamples u1 = evolve_line(u0, m, cfg.time.t, guarded(cfg));
    LineSamples fd = restrict_to(u1, k.lo, k.hi);
    if (fd.size() < 2) throw std::invalid_argument("kernel: window holds fewer than two grid nodes");

    LayerParams p = layer_params(g.a, g.l);
    auto grid = default_xi_grid(p, k.grid);
    WienerSeries S = invert_E(p, k.K, grid);
    double residual = wiener_residual(S, p, grid);
    double right = static_cast<double>(g.a.size() - 2) * g.l + k.support;
    LineSamples u0c = restrict_to(u0, -k.support, right);
    HalflineSolution sol = solve_negative_halfline(u0c, sig, cfg.time.t, fd.x, S,
                                                   k.assembly == "eta" ? Assembly::eta : Assembly::kernels);
    double err = relative_l2_error(sol.u, fd);

    Table cmp("x,re_fd,im_fd,re_kernel,im_kernel,abs_err");
    for (std::size_t i = 0; i < fd.size(); ++i)
        cmp.row(fd.x[i], fd.u[i].real(), fd.u[i].imag(), sol.u.u[i].real(), sol.u.u[i].imag(),
                std::abs(fd.u[i] - sol.u.u[i]));
    Table sum("rel_l2,K,rho,tail_bound,wiener_residual,eta_atoms");
    sum.row(err, k.K, S.rho, S.tail_bound, residual, sol.eta.atoms.size());
    std::ostringstream ser;
    write_series_csv(ser, S, p);
    out["compare.csv"] = cmp.str();
    out["summary.csv"] = sum.str();
    out["series.csv"] = ser.str();

    checks.push_back({"wiener residual minus tail bound", std::max(0.0, residual - S.tail_bound), 1e-14});
    double closed = 0.0, det = 0.0;
    const std::size_t N = p.N();
    for (std::size_t j = 2; j + 1 <= N; ++j)
        for (std::size_t kk = 1; kk < j; ++kk) {
            EFPair ef = ef_recursion(j, kk, p);
            for (double xi : {-1.3, 0.0, 0.7, 2.9}) {
                Eigen::Matrix2cd T = chain_product(j, kk, xi, p);
                auto [b, a] = closed_form_entries(j, kk, xi, p, ef);
                closed = std::max({closed, std::abs(T(1, 0) - b), std::abs(T(1, 1) - a)});
                double d = std::norm(T(1, 1)) - std::norm(T(1, 0));
                det = std::max(det, std::abs(d - determinant_product(j, kk, p)));
            }
        }
    checks.push_back({"closed-form entries", closed, 1e-12});
    checks.push_back({"determinant identity", det, 1e-12});
}

void run_sharpness(const ExperimentConfig& cfg, Outputs& out, std::vector<Check>& checks) {
    const GraphSpec& g = *cfg.graph;
    const LineFn f = initial_function(cfg);
    LineSamples l0, l1;
    Side side;
    ThresholdContext ctx;
    ctx.band = cfg.threshold.band;
    ctx.N = cfg.threshold.N;
    double n0, n1;
    if (g.type == "star") {
        GraphBuild b = build_graph(g);
        GraphState s0 = sample_graph(b, f);
        GraphState s1 = evolve_graph(s0, cfg.time.t, guarded(cfg));
        n0 = graph_norm(s0);
        n1 = graph_norm(s1);
        l0 = edge_samples(s0, 0);
        l1 = edge_samples(s1, 0);
        side = Side::positive;
        ctx.kind = ThresholdContext::Kind::star_free;
    } else {
        PiecewiseCoefficient sig = coefficient_of(g);
        LineMedium m = line_medium(sig, g.L, g.h);
        l0 = sample_line(m.x, f);
        l0.u.front() = l0.u.back() = 0.0;
        l1 = evolve_line(l0, m, cfg.time.t, guarded(cfg));
        n0 = l2_norm(l0);
        n1 = l2_norm(l1);
        side = Side::both;
        ctx.kind = ThresholdContext::Kind::line_sigma;
        ctx.line_case = cfg.threshold.line_case;
        ctx.sigma_minus = sig.sigma_minus();
        ctx.sigma_plus = sig.sigma_plus();
    }
    if (cfg.threshold.kind == "star_free") ctx.kind = ThresholdContext::Kind::star_free;
    if (cfg.threshold.kind == "star_potential") ctx.kind = ThresholdContext::Kind::star_potential;
    if (cfg.threshold.kind == "line_sigma") {
        if (g.type != "line_sigma") throw std::invalid_argument("threshold: line_sigma rule needs a line_sigma graph");
        ctx.kind = ThresholdContext::Kind::line_sigma;
    }

    DecayFit f0 = fit_gaussian_decay(l0, side, cfg.fit.lo, cfg.fit.hi);
    DecayFit f1 = fit_gaussian_decay(l1, side, cfg.fit.lo, cfg.fit.hi);
    if (f0.identically_zero || f1.identically_zero) throw NumericalGuard("solution vanishes on the fit window");
    if (!(f0.rate > 0.0) || !(f1.rate > 0.0)) throw NumericalGuard("fitted decay rate is not positive");
    ThresholdVerdict v = classify_threshold(f0.rate, f1.rate, ctx);

    Table ver("alpha,beta,product,threshold,regime,rule");
    ver.row(f0.rate, f1.rate, v.product, v.threshold, to_string(v.regime), v.rule);
    Table fit("time,rate,intercept,lo,hi,residual,samples");
    fit.row(0.0, f0.rate, f0.intercept, f0.lo, f0.hi, f0.residual, f0.samples);
    fit.row(cfg.time.t, f1.rate, f1.intercept, f1.lo, f1.hi, f1.residual, f1.samples);
    Table dec("x,log_abs_u0,log_abs_u1");
    for (std::size_t i = 0; i < l0.size(); ++i) {
        double a0 = std::abs(l0.u[i]), a1 = std::abs(l1.u[i]);
        if (a0 > 0.0 && a1 > 0.0) dec.row(l0.x[i], std::log(a0), std::log(a1));
    }
    out["verdict.csv"] = ver.str();
    out["fit.csv"] = fit.str();
    out["decay.csv"] = dec.str();
    checks.push_back({"norm drift", std::abs(n1 - n0) / n0, 1e-8});
}

void run_reduce_tree(const ExperimentConfig& cfg, Outputs& out, std::vector<Check>& checks) {
    const GraphSpec& g = *cfg.graph;
    GraphBuild b = build_graph(g);
    GraphState s0 = sample_graph(b, initial_function(cfg));
    GraphState s1 = evolve_graph(s0, cfg.time.t, guarded(cfg));
    ReductionMap map = reduction_map(*b.graph.tree());
    LineSamples w0 = fold_to_line(averaged_sums(s0), map);
    LineSamples w1 = fold_to_line(averaged_sums(s1), map);
    LineMedium med = fold_medium(w0, map);
    LineSamples w1b = evolve_line(w0, med, cfg.time.t, guarded(cfg));
    double err = relative_l2_error(w1, w1b);

    std::ostringstream ms;
    write_reduction_csv(ms, map);
    Table cmp("x,re_tree,im_tree,re_line,im_line");
    for (std::size_t i = 0; i < w1.size(); ++i)
        cmp.row(w1.x[i], w1.u[i].real(), w1.u[i].imag(), w1b.u[i].real(), w1b.u[i].imag());
    Table sum("rel_l2,sigma_minus,sigma_plus,intervals");
    sum.row(err, map.sigma_minus(), map.sigma_plus(), map.sigma.size());
    out["map.csv"] = ms.str();
    out["compare.csv"] = cmp.str();
    out["summary.csv"] = sum.str();

    double sig = 0.0, mono = 0.0;
    for (std::size_t i = 0; i < map.sigma.size(); ++i) sig = std::max(sig, std::abs(map.sigma[i] - map.slope[i] * map.slope[i]));
    for (std::size_t i = 1; i < map.b.size(); ++i) mono = std::max(mono, map.b[i - 1] - map.b[i]);
    checks.push_back({"sigma equals slope squared", sig, 1e-14});
    checks.push_back({"map monotone", std::max(0.0, mono), 0.0});
    checks.push_back({"fold commutes with evolution", err, 2e-2});
}

std::vector<WeightParams> default_triples() {
    std::vector<WeightParams> v;
    for (double mu : {0.5, 1.0, 2.0})
        for (double eps : {0.25, 0.5})
            for (double R : {2.0, 4.0, 8.0}) v.push_back({mu, eps, R});
    return v;
}

void run_carleman(const ExperimentConfig& cfg, Outputs& out, std::vector<Check>& checks) {
    const CarlemanSpec& c = cfg.carleman;
    auto triples = c.triples.empty() ? default_triples() : c.triples;
    Table tab("N,seed,mu,eps,R,lhs,rhs,margin,error_estimate,pass");
    int failures = 0;
    double worst = kInfinity, zsum = 0.0;
    for (int N : c.N) {
        AlphaVectors av = alpha_vectors(N);
        if (!check_alpha_invariants(av).all()) throw NumericalGuard("alpha-vector invariants fail for N=" + std::to_string(N));
        for (int s = 0; s < c.seeds; ++s) {
            std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
            ZcompSample q = sample_zcomp(N, seed, c.budget, c.support);
            for (double t : {0.1, 0.37, 0.5, 0.81}) {
                cplx acc = 0.0;
                for (int j = 0; j < N; ++j) acc += q.q_x(j, t, 0.0);
                zsum = std::max(zsum, std::abs(acc));
            }
            auto sides = carleman_sides(q, triples, av, c.t_nodes, c.x_nodes);
            for (std::size_t i = 0; i < sides.size(); ++i) {
                const auto& r = sides[i];
                bool pass = r.margin >= -r.error_estimate;
                failures += !pass;
                worst = std::min(worst, r.margin);
                tab.row(N, seed, triples[i].mu, triples[i].eps, triples[i].R, r.lhs, r.rhs, r.margin,
                        r.error_estimate, pass ? 1 : 0);
            }
        }
    }
    Table sum("evaluations,failures,min_margin");
    std::size_t evals = c.N.size() * static_cast<std::size_t>(c.seeds) * triples.size();
    sum.row(evals, failures, worst);
    out["margins.csv"] = tab.str();
    out["summary.csv"] = sum.str();
    checks.push_back({"zcomp flux sum at the vertex", zsum, 1e-12});
    checks.push_back({"inequality failures", static_cast<double>(failures), 0.0});
}

// int |f|^2 over the grid by the trapezoid rule; the integrand must have decayed at both ends
double grid_norm(const std::function<cplx(double)>& f, double X, double h, const char* what) {
    const auto n = static_cast<std::size_t>(std::llround(2.0 * X / h));
    std::vector<double> v(n + 1);
    double peak = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        v[i] = std::norm(f(-X + static_cast<double>(i) * 2.0 * X / static_cast<double>(n)));
        if (!std::isfinite(v[i])) throw NumericalGuard(std::string(what) + ": weighted integrand overflows");
        peak = std::max(peak, v[i]);
    }
    if (std::max(v.front(), v.back()) > 1e-12 * peak)
        throw NumericalGuard(std::string(what) + ": weighted integrand has not decayed at |x| = X");
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return std::sqrt(s * 2.0 * X / static_cast<double>(n));
}

void run_appell(const ExperimentConfig& cfg, Outputs& out, std::vector<Check>& checks) {
    const AppellSpec& a = cfg.appell;
    const cplx Z(a.params.A, a.params.B);
    // Gaussian solution of u_t = (A + iB) u_xx
    SliceFamily u = [Z](double t, double x) {
        cplx d = 1.0 + 4.0 * Z * t;
        return std::exp(-x * x / d) / std::sqrt(d);
    };
    SliceFamily fwd = appell_transform(u, a.params, Direction::forward);
    SliceFamily back = appell_transform(fwd, a.params, Direction::inverse);
    Table tab("t,s,exponent,lhs,rhs,rel_diff,roundtrip");
    double worst_norm = 0.0, worst_trip = 0.0;
    for (double t : a.times) {
        double s = appell_time(t, a.params);
        double c = appell_norm_exponent(t, a.gamma, a.params);
        double lhs = grid_norm([&](double x) { return std::exp(a.gamma * x * x) * fwd(t, x); }, a.X, a.h, "lhs");
        double rhs = grid_norm([&](double y) { return std::exp(c * y * y) * u(s, y); }, a.X, a.h, "rhs");
        double trip = 0.0, peak = 0.0;
        const auto n = static_cast<std::size_t>(std::llround(2.0 * a.X / a.h));
        for (std::size_t i = 0; i <= n; ++i) {
            double x = -a.X + static_cast<double>(i) * 2.0 * a.X / static_cast<double>(n);
            trip = std::max(trip, std::abs(back(t, x) - u(t, x)));
            peak = std::max(peak, std::abs(u(t, x)));
        }
        trip /= peak;
        double rel = std::abs(lhs - rhs) / rhs;
        worst_norm = std::max(worst_norm, rel);
        worst_trip = std::max(worst_trip, trip);
        tab.row(t, s, c, lhs, rhs, rel, trip);
    }
    out["appell.csv"] = tab.str();
    checks.push_back({"norm identity", worst_norm, 1e-8});
    checks.push_back({"round trip", worst_trip, 1e-10});
}

void run_sweep(const ExperimentConfig& cfg, Outputs& out, std::vector<Check>& checks) {
    ThresholdContext ctx;
    const ThresholdSpec& t = cfg.threshold;
    ctx.band = t.band;
    ctx.N = t.N;
    ctx.line_case = t.line_case;
    if (t.kind == "star_free") ctx.kind = ThresholdContext::Kind::star_free;
    if (t.kind == "star_potential") ctx.kind = ThresholdContext::Kind::star_potential;
    if (t.kind == "line_sigma") ctx.kind = ThresholdContext::Kind::line_sigma;
    Table tab("alpha,beta,product,threshold,regime,rule");
    auto rank = [](Regime r) { return r == Regime::below ? 0 : r == Regime::boundary ? 1 : 2; };
    auto alphas = cfg.sweep.alpha, betas = cfg.sweep.beta;
    std::sort(alphas.begin(), alphas.end());
    std::sort(betas.begin(), betas.end());
    double violations = 0.0;
    std::vector<int> prev(betas.size(), -1);
    for (double al : alphas) {
        int left = -1;
        for (std::size_t i = 0; i < betas.size(); ++i) {
            ThresholdVerdict v = classify_threshold(al, betas[i], ctx);
            tab.row(al, betas[i], v.product, v.threshold, to_string(v.regime), v.rule);
            int r = rank(v.regime);
            if (r < left || r < prev[i]) violations += 1.0;
            left = r;
            prev[i] = r;
        }
    }
    out["verdicts.csv"] = tab.str();
    checks.push_back({"monotone verdicts", violations, 0.0});
}

void dispatch(const ExperimentConfig& cfg, Outputs& out, std::vector<Check>& checks) {
    switch (cfg.kind) {
        case ExperimentKind::simulate: return run_simulate(cfg, out, checks);
        case ExperimentKind::kernel_compare: return run_kernel_compare(cfg, out, checks);
        case ExperimentKind::sharpness: return run_sharpness(cfg, out, checks);
        case ExperimentKind::reduce_tree: return run_reduce_tree(cfg, out, checks);
        case ExperimentKind::carleman: return run_carleman(cfg, out, checks);
        case ExperimentKind::appell: return run_appell(cfg, out, checks);
        case ExperimentKind::threshold_sweep: return run_sweep(cfg, out, checks);
    }
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
}

}  // namespace

RunResult run(const ExperimentConfig& cfg, const RunOptions& opt) {
    RunResult r;
    r.results.kind = cfg.kind;
    r.results.dir = resolve_output_dir(opt.out.string(), cfg) / cfg.name;
    Outputs out;
    std::vector<Check> checks;
    try {
        dispatch(cfg, out, checks);
    } catch (const NumericalGuard& e) {
        r.exit_code = kExitNumerical;
        r.message = e.what();
        return r;
    } catch (const std::invalid_argument& e) {
        r.exit_code = kExitInvalid;
        r.message = e.what();
        return r;
    } catch (const std::exception& e) {
        r.exit_code = kExitNumerical;
        r.message = e.what();
        return r;
    }
    if (opt.verify) {
        Table v("check,value,tolerance,pass");
        for (const auto& c : checks) {
            bool pass = c.value <= c.tolerance;
            v.row(c.name, c.value, c.tolerance, pass ? 1 : 0);
            if (!pass) {
                r.exit_code = kExitNumerical;
                r.message = "verify: " + c.name + " failed";
            }
        }
        out["verify.csv"] = v.str();
    }
    try {
        fs::create_directories(r.results.dir);
        const std::string head = provenance_header(cfg);
        for (const auto& [name, body] : out) {
            write_text(r.results.dir / name, head + body);
            r.results.files.push_back(name);
        }
        if (opt.plots && cfg.plots) emit_plots(r.results);
    } catch (const std::exception& e) {
        r.exit_code = kExitInvalid;
        r.message = e.what();
    }
    return r;
}

std::vector<RunResult> run_jobs(const std::vector<ExperimentConfig>& jobs, const RunOptions& opt, int workers) {
    std::vector<RunResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < jobs.size();) results[i] = run(jobs[i], opt);
    };
    const auto n = static_cast<std::size_t>(std::max(1, workers));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::min(n, jobs.size()); ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return results;
}

namespace {

const char* kPlotPrelude = R"(import csv
import math
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(HERE, name)) as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    head, body = rows[0], rows[1:]
    return {h: [float(r[i]) if _num(r[i]) else r[i] for r in body] for i, h in enumerate(head)}


def _num(s):
    try:
        float(s)
        return True
    except ValueError:
        return False

)";

std::string plot_body(ExperimentKind k, const std::vector<std::string>& files) {
    using K = ExperimentKind;
    switch (k) {
        case K::sharpness:
            return R"(d = load("decay.csv")
f = load("fit.csv")
x2 = [x * x for x in d["x"]]
fig, ax = plt.subplots()
ax.plot(x2, d["log_abs_u0"], ".", ms=2, label="log|u(0)|")
ax.plot(x2, d["log_abs_u1"], ".", ms=2, label="log|u(t)|")
for rate, c, lo, hi in zip(f["rate"], f["intercept"], f["lo"], f["hi"]):
    ax.plot([lo * lo, hi * hi], [c - rate * lo * lo, c - rate * hi * hi], "k--", lw=1)
ax.set_xlabel("x^2")
ax.legend()
fig.savefig(os.path.join(HERE, "decay.png"), dpi=150)
)";
        case K::kernel_compare:
            return R"(d = load("compare.csv")
fd = [math.hypot(a, b) for a, b in zip(d["re_fd"], d["im_fd"])]
kr = [math.hypot(a, b) for a, b in zip(d["re_kernel"], d["im_kernel"])]
fig, (a1, a2) = plt.subplots(2, 1, sharex=True)
a1.plot(d["x"], fd, label="finite difference")
a1.plot(d["x"], kr, "--", label="transfer kernel")
a1.set_ylabel("|u|")
a1.legend()
a2.semilogy(d["x"], [max(e, 1e-18) for e in d["abs_err"]])
a2.set_ylabel("pointwise error")
a2.set_xlabel("x")
fig.savefig(os.path.join(HERE, "compare.png"), dpi=150)
)";
        case K::reduce_tree:
            return R"(d = load("compare.csv")
fig, ax = plt.subplots()
ax.plot(d["x"], [math.hypot(a, b) for a, b in zip(d["re_tree"], d["im_tree"])], label="fold of tree solution")
ax.plot(d["x"], [math.hypot(a, b) for a, b in zip(d["re_line"], d["im_line"])], "--", label="line solution")
ax.set_xlabel("x")
ax.legend()
fig.savefig(os.path.join(HERE, "compare.png"), dpi=150)
)";
        case K::carleman:
            return R"(d = load("margins.csv")
fig, ax = plt.subplots()
ax.semilogy(range(len(d["margin"])), [max(m, 1e-300) for m in d["margin"]], ".", ms=3)
ax.set_xlabel("case")
ax.set_ylabel("rhs - lhs")
fig.savefig(os.path.join(HERE, "margins.png"), dpi=150)
)";
        default: {
            std::string s = "for name in [";
            for (const auto& f : files) s += "\"" + f + "\", ";
            s += R"(]:
    d = load(name)
    keys = [k for k in d if d[k] and isinstance(d[k][0], float)]
    if len(keys) < 2:
        continue
    fig, ax = plt.subplots()
    for k in keys[1:]:
        ax.plot(d[keys[0]], d[k], label=k)
    ax.set_xlabel(keys[0])
    ax.legend()
    fig.savefig(os.path.join(HERE, name.replace(".csv", ".png")), dpi=150)
)";
            return s;
        }
    }
}

}  // namespace

fs::path emit_plots(const ResultSet& results) {
    if (results.files.empty()) throw std::invalid_argument("empty result set");
    for (const auto& f : results.files)
        if (!fs::exists(results.dir / f)) throw std::invalid_argument("missing result file " + f);
    fs::path p = results.dir / "plot.py";
    write_text(p, std::string(kPlotPrelude) + plot_body(results.kind, results.files));
    return p;
}

}  // namespace qgraph

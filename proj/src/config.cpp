#include "qgraph/config.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "json_io.hpp"

namespace qgraph {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::simulate: return "simulate";
        case ExperimentKind::kernel_compare: return "kernel-compare";
        case ExperimentKind::sharpness: return "sharpness";
        case ExperimentKind::reduce_tree: return "reduce-tree";
        case ExperimentKind::carleman: return "carleman";
        case ExperimentKind::appell: return "appell";
        case ExperimentKind::threshold_sweep: return "threshold-sweep";
    }
    return "?";
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical); }

namespace {

ExperimentKind kind_from(const std::string& s) {
    for (auto k : {ExperimentKind::simulate, ExperimentKind::kernel_compare, ExperimentKind::sharpness,
                   ExperimentKind::reduce_tree, ExperimentKind::carleman, ExperimentKind::appell,
                   ExperimentKind::threshold_sweep})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown kind '" + s + "'");
}

template <class T>
void read(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

void need(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::set<std::string> sections_for(ExperimentKind k) {
    using K = ExperimentKind;
    switch (k) {
        case K::simulate: return {"graph", "initial", "time"};
        case K::kernel_compare: return {"graph", "initial", "time", "kernel"};
        case K::sharpness: return {"graph", "initial", "time", "fit", "threshold"};
        case K::reduce_tree: return {"graph", "initial", "time"};
        case K::carleman: return {"carleman"};
        case K::appell: return {"appell"};
        case K::threshold_sweep: return {"threshold", "sweep"};
    }
    return {};
}

void parse_initial(const json& j, InitialSpec& s) {
    detail::reject_unknown_keys(j, {"type", "alpha", "chirp", "path"}, "initial");
    read(j, "type", s.type);
    read(j, "alpha", s.alpha);
    read(j, "chirp", s.chirp);
    read(j, "path", s.path);
    need(s.type == "gaussian" || s.type == "piecewise" || s.type == "file",
         "initial: type must be gaussian, piecewise or file");
    if (s.type == "file") {
        need(!s.path.empty(), "initial: file data needs a path");
    } else {
        need(s.alpha > 0.0, "initial: alpha must be positive");
        need(s.path.empty(), "initial: path is only used with type file");
    }
}

void parse_carleman(const json& j, CarlemanSpec& s) {
    detail::reject_unknown_keys(j, {"N", "seeds", "triples", "t_nodes", "x_nodes", "budget", "support"}, "carleman");
    if (j.contains("N")) {
        if (j.at("N").is_number())
            s.N = {j.at("N").get<int>()};
        else
            s.N = j.at("N").get<std::vector<int>>();
    }
    read(j, "seeds", s.seeds);
    read(j, "t_nodes", s.t_nodes);
    read(j, "x_nodes", s.x_nodes);
    read(j, "budget", s.budget);
    read(j, "support", s.support);
    if (j.contains("triples"))
        for (const auto& t : j.at("triples")) {
            auto v = t.get<std::vector<double>>();
            need(v.size() == 3, "carleman: each triple is [mu, eps, R]");
            need(v[0] > 0.0 && v[1] > 0.0 && v[2] > 0.0, "carleman: mu, eps, R must be positive");
            s.triples.push_back({v[0], v[1], v[2]});
        }
    need(!s.N.empty(), "carleman: N list is empty");
    for (int n : s.N) need(n >= 2, "carleman: N must be >= 2");
    need(s.seeds >= 1, "carleman: seeds must be >= 1");
    need(s.t_nodes >= 5 && (s.t_nodes - 1) % 4 == 0, "carleman: t_nodes must be 4m+1");
    need(s.x_nodes >= 5 && (s.x_nodes - 1) % 4 == 0, "carleman: x_nodes must be 4m+1");
    need(s.budget >= 0, "carleman: budget must be >= 0");
    need(s.support > 0.0, "carleman: support must be positive");
}

void parse_appell(const json& j, AppellSpec& s) {
    detail::reject_unknown_keys(j, {"alpha", "beta", "A", "B", "gamma", "times", "X", "h"}, "appell");
    read(j, "alpha", s.params.alpha);
    read(j, "beta", s.params.beta);
    read(j, "A", s.params.A);
    read(j, "B", s.params.B);
    read(j, "gamma", s.gamma);
    read(j, "times", s.times);
    read(j, "X", s.X);
    read(j, "h", s.h);
    need(s.params.alpha > 0.0 && s.params.beta > 0.0, "appell: alpha and beta must be positive");
    need(s.params.A != 0.0 || s.params.B != 0.0, "appell: A + iB must not vanish");
    need(!s.times.empty(), "appell: times is empty");
    for (double t : s.times) need(t >= 0.0 && t <= 1.0, "appell: times must lie in [0, 1]");
    need(s.X > 0.0 && s.h > 0.0 && s.X / s.h >= 16.0, "appell: need X, h > 0 and X/h >= 16");
}

void parse_threshold(const json& j, ThresholdSpec& s) {
    detail::reject_unknown_keys(j, {"kind", "line_case", "N", "band"}, "threshold");
    read(j, "kind", s.kind);
    read(j, "line_case", s.line_case);
    read(j, "N", s.N);
    read(j, "band", s.band);
    need(s.kind.empty() || s.kind == "star_free" || s.kind == "star_potential" || s.kind == "line_sigma",
         "threshold: kind must be star_free, star_potential or line_sigma");
    need(s.line_case >= 1 && s.line_case <= 3, "threshold: line_case must be 1, 2 or 3");
    need(s.N >= 2, "threshold: N must be >= 2");
    need(s.band >= 0.0, "threshold: band must be non-negative");
}

ExperimentConfig parse_job(json j, std::optional<std::uint64_t> seed_override) {
    detail::reject_unknown_keys(j,
                                {"kind", "name", "seed", "graph", "initial", "time", "fit", "threshold", "kernel",
                                 "carleman", "appell", "sweep", "output"},
                                "config");
    ExperimentConfig c;
    need(j.contains("kind"), "config: missing kind");
    c.kind = kind_from(j.at("kind").get<std::string>());
    c.name = j.value("name", to_string(c.kind));
    need(!c.name.empty() && c.name.find_first_of("/\\") == std::string::npos && c.name != "." && c.name != "..",
         "config: name must be a plain directory name");
    if (seed_override) j["seed"] = *seed_override;
    c.seed = j.value("seed", std::uint64_t{0});
    j["seed"] = c.seed;

    const auto allowed = sections_for(c.kind);
    for (const char* sec : {"graph", "initial", "time", "fit", "threshold", "kernel", "carleman", "appell", "sweep"})
        if (j.contains(sec) && !allowed.count(sec))
            throw std::invalid_argument(std::string("config: section '") + sec + "' is not used by kind " +
                                        to_string(c.kind));

    if (allowed.count("graph")) {
        need(j.contains("graph"), "config: kind " + to_string(c.kind) + " needs a graph");
        c.graph = detail::graph_spec_from_json(j.at("graph"));
        const auto& g = *c.graph;
        need(g.L > 0.0 && g.h > 0.0 && g.L / g.h >= 16.0, "graph: need L, h > 0 and L/h >= 16");
        if (g.type == "line_sigma") {
            need(g.a.size() >= 2, "graph: line_sigma needs at least two values a");
            for (double v : g.a) need(v > 0.0, "graph: a values must be positive");
            need(g.l > 0.0, "graph: l must be positive");
        }
        if (g.type == "star") need(g.N >= 2, "graph: star needs N >= 2");
        if (g.type == "regular_tree") {
            need(!g.lengths.empty() && g.degrees.size() == g.lengths.size() + 1,
                 "graph: regular_tree needs n lengths and n+1 degrees");
        }
        using K = ExperimentKind;
        if (c.kind == K::kernel_compare) need(g.type == "line_sigma", "kernel-compare needs a line_sigma graph");
        if (c.kind == K::reduce_tree) need(g.type == "regular_tree", "reduce-tree needs a regular_tree graph");
        if (c.kind == K::sharpness)
            need(g.type == "star" || g.type == "line_sigma", "sharpness needs a star or line_sigma graph");
    }
    if (j.contains("initial")) parse_initial(j.at("initial"), c.initial);
    if (c.initial.type == "piecewise")
        need(c.graph && c.graph->type == "line_sigma", "initial: piecewise data needs a line_sigma graph");
    if (c.initial.type == "file")
        need(c.graph && c.graph->type == "line_sigma", "initial: file data needs a line_sigma graph");
    if (j.contains("time")) {
        const auto& t = j.at("time");
        detail::reject_unknown_keys(t, {"t", "dt", "guard"}, "time");
        read(t, "t", c.time.t);
        read(t, "dt", c.time.dt);
        read(t, "guard", c.time.guard);
        need(c.time.guard > 0.0, "time: guard must be positive");
        need(c.time.dt > 0.0, "time: dt must be positive");
        need(c.time.t > 0.0, "time: t must be positive");
        double steps = c.time.t / c.time.dt;
        need(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps), "time: dt must divide t");
    }
    if (j.contains("fit")) {
        const auto& f = j.at("fit");
        detail::reject_unknown_keys(f, {"lo", "hi"}, "fit");
        read(f, "lo", c.fit.lo);
        read(f, "hi", c.fit.hi);
    }
    if (allowed.count("fit")) need(c.fit.lo >= 0.0 && c.fit.hi > c.fit.lo, "fit: need 0 <= lo < hi");
    if (j.contains("threshold")) parse_threshold(j.at("threshold"), c.threshold);
    if (j.contains("kernel")) {
        const auto& k = j.at("kernel");
        detail::reject_unknown_keys(k, {"K", "grid", "window", "support", "assembly"}, "kernel");
        read(k, "K", c.kernel.K);
        read(k, "grid", c.kernel.grid);
        read(k, "support", c.kernel.support);
        read(k, "assembly", c.kernel.assembly);
        if (k.contains("window")) {
            auto w = k.at("window").get<std::vector<double>>();
            need(w.size() == 2, "kernel: window is [lo, hi]");
            c.kernel.lo = w[0];
            c.kernel.hi = w[1];
        }
        need(c.kernel.K >= 0, "kernel: K must be >= 0");
        need(c.kernel.grid >= 2, "kernel: grid needs at least two points");
        need(c.kernel.lo < c.kernel.hi && c.kernel.hi <= 0.0, "kernel: window must satisfy lo < hi <= 0");
        need(c.kernel.support > 0.0, "kernel: support must be positive");
        need(c.kernel.assembly == "eta" || c.kernel.assembly == "kernels", "kernel: assembly is eta or kernels");
    }
    if (c.kind == ExperimentKind::carleman) {
        if (j.contains("carleman")) parse_carleman(j.at("carleman"), c.carleman);
    }
    if (c.kind == ExperimentKind::appell) {
        if (j.contains("appell")) parse_appell(j.at("appell"), c.appell);
    }
    if (c.kind == ExperimentKind::threshold_sweep) {
        need(j.contains("sweep"), "config: threshold-sweep needs a sweep section");
        const auto& s = j.at("sweep");
        detail::reject_unknown_keys(s, {"alpha", "beta"}, "sweep");
        read(s, "alpha", c.sweep.alpha);
        read(s, "beta", c.sweep.beta);
        need(!c.sweep.alpha.empty() && !c.sweep.beta.empty(), "sweep: alpha and beta lists are required");
        for (double v : c.sweep.alpha) need(v > 0.0, "sweep: rates must be positive");
        for (double v : c.sweep.beta) need(v > 0.0, "sweep: rates must be positive");
        need(!c.threshold.kind.empty(), "threshold: kind is required for a sweep");
        need(c.threshold.kind != "line_sigma" || j.at("threshold").contains("line_case"),
             "threshold: line_sigma sweeps need line_case");
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::reject_unknown_keys(o, {"dir", "plots"}, "output");
        read(o, "dir", c.output_dir);
        read(o, "plots", c.plots);
    }
    // output location does not change results, so it stays out of the hash
    json h = j;
    h.erase("output");
    c.canonical = h.dump();
    return c;
}

}  // namespace

std::vector<ExperimentConfig> parse_experiments(const std::string& text, std::optional<std::uint64_t> seed_override) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    std::vector<ExperimentConfig> out;
    try {
        if (doc.is_object() && doc.contains("jobs")) {
            detail::reject_unknown_keys(doc, {"jobs"}, "config");
            need(doc.at("jobs").is_array() && !doc.at("jobs").empty(), "config: jobs must be a non-empty list");
            for (const auto& j : doc.at("jobs")) out.push_back(parse_job(j, seed_override));
        } else {
            out.push_back(parse_job(doc, seed_override));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    std::set<std::string> names;
    for (const auto& c : out)
        if (!names.insert(c.name).second) throw std::invalid_argument("config: duplicate job name '" + c.name + "'");
    return out;
}

ExperimentConfig parse_experiment(const std::string& text, std::optional<std::uint64_t> seed_override) {
    auto v = parse_experiments(text, seed_override);
    if (v.size() != 1) throw std::invalid_argument("expected a single job");
    return v.front();
}

}  // namespace qgraph

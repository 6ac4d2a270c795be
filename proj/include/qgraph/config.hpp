#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qgraph/carleman.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/uncertainty.hpp"

namespace qgraph {

enum class ExperimentKind { simulate, kernel_compare, sharpness, reduce_tree, carleman, appell, threshold_sweep };

std::string to_string(ExperimentKind k);

// u0(x) = exp(-(alpha + i chirp) x^2); "piecewise" scales the exponent by a_i^2
// on the piece containing x; "file" reads x,re,im rows and interpolates linearly.
struct InitialSpec {
    std::string type = "gaussian";
    double alpha = 1.0;
    double chirp = 0.0;
    std::string path;
};

struct TimeSpec {
    double t = 1.0;
    double dt = 1e-3;
    double guard = 1e-6;  // largest tolerated norm fraction in the outer 20% of the truncation
};

struct FitSpec {
    double lo = 1.0;
    double hi = 4.0;
};

struct ThresholdSpec {
    std::string kind;  // star_free | star_potential | line_sigma; empty: inferred from the graph
    int line_case = 3;
    int N = 3;
    double band = 0.05;
};

struct KernelSpec {
    int K = 20;
    std::size_t grid = 2048;
    double lo = -20.0, hi = 0.0;  // comparison window, hi <= 0
    double support = 7.0;         // u0 is cut to [-support, (N-2) l + support]
    std::string assembly = "eta";
};

struct CarlemanSpec {
    std::vector<int> N{3, 4, 5};
    int seeds = 20;
    std::vector<WeightParams> triples;  // empty: {0.5,1,2} x {0.25,0.5} x {2,4,8}
    int t_nodes = 201;
    int x_nodes = 401;
    int budget = 3;
    double support = 2.0;
};

struct AppellSpec {
    AppellParams params;
    double gamma = 0.0;
    std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
    double X = 24.0;
    double h = 0.01;
};

struct SweepSpec {
    std::vector<double> alpha;
    std::vector<double> beta;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::simulate;
    std::string name;
    std::uint64_t seed = 0;
    std::optional<GraphSpec> graph;
    InitialSpec initial;
    TimeSpec time;
    FitSpec fit;
    ThresholdSpec threshold;
    KernelSpec kernel;
    CarlemanSpec carleman;
    AppellSpec appell;
    SweepSpec sweep;
    std::string output_dir;
    bool plots = true;
    std::string canonical;  // sorted-key JSON of the validated job, seed included
    std::uint64_t hash() const;
};

// A document is either one job or {"jobs": [job, ...]}. Everything is validated
// here; unknown keys and sections unused by the kind are rejected.
std::vector<ExperimentConfig> parse_experiments(const std::string& text,
                                                std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig parse_experiment(const std::string& text,
                                  std::optional<std::uint64_t> seed_override = std::nullopt);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace qgraph

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "qgraph/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Batch experiments for Schroedinger evolution on metric graphs"};
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool verify = false, no_plots = false;
    app.add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (default: config output.dir, then $QGRAPH_OUT_DIR)");
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--jobs", jobs, "worker threads for job lists")->check(CLI::Range(1, 256));
    app.add_flag("--verify", verify, "run the invariant checks of the touched modules");
    app.add_flag("--no-plots", no_plots, "skip plot.py");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : qgraph::kExitInvalid;
    }

    std::ifstream in(config_path);
    std::stringstream text;
    text << in.rdbuf();
    std::vector<qgraph::ExperimentConfig> cfgs;
    try {
        cfgs = qgraph::parse_experiments(text.str(), seed);
    } catch (const std::exception& e) {
        std::cerr << "qgraph: invalid config: " << e.what() << '\n';
        return qgraph::kExitInvalid;
    }

    qgraph::RunOptions opt;
    opt.out = out_dir;
    opt.verify = verify;
    opt.plots = !no_plots;
    auto results = qgraph::run_jobs(cfgs, opt, jobs);
    int rc = qgraph::kExitOk;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (r.exit_code == qgraph::kExitOk)
            std::cout << cfgs[i].name << ": ok -> " << r.results.dir.string() << '\n';
        else
            std::cerr << cfgs[i].name << ": exit " << r.exit_code << ": " << r.message << '\n';
        rc = std::max(rc, r.exit_code);
    }
    return rc;
}

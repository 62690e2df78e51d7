#include "conjlab/harness/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace conjlab::harness;
    CLI::App app{"Monte Carlo experiments for conjunctions of stationary Gaussian processes"};
    app.require_subcommand(1);

    RunRequest req;
    std::string config;
    std::uint64_t seed = 0;
    const char* about[] = {
        "classical and generalized Pickands constants",
        "sup-tail probabilities of the conjunction and ratio to the asymptotics",
        "order-statistic sup tails with the product identity and union-bound checks",
        "sojourn times and the Berman-type limit comparison",
        "conditional excursion law near the level versus the limit process",
        "covariance checks of the fBm and stationary samplers",
        "rebuild plot-data files from the result files in --out",
    };
    std::size_t k = 0;
    for (const auto& name : commands()) {
        auto* sub = app.add_subcommand(name, about[k++]);
        if (name != "plot-data") sub->add_option("--config", config, "YAML or JSON config, or a manifest.json")->required();
        sub->add_option("--seed", seed, std::string("master seed (overrides ") + kSeedEnvVar + " and the config)");
        sub->add_option("--out", req.out, "output directory")->capture_default_str();
        sub->add_option("--jobs", req.jobs, "worker threads, 0 = all cores (never changes results)")->capture_default_str();
        sub->add_option("--format", req.format, "result files to write")
            ->check(CLI::IsMember({"json", "csv", "both"}))
            ->capture_default_str();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    for (auto* sub : app.get_subcommands()) {
        req.command = sub->get_name();
        if (!config.empty()) req.config = config;
        if (sub->count("--seed") > 0) req.seed = seed;
    }
    return run(req, std::cerr);
}

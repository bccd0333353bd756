// qconv: config-driven laboratory for tabular and kernel-weighted Q-learning
// convergence experiments. See docs/formats.md for config and output schemas.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qconv/errors.hpp"
#include "qconv/experiment.hpp"
#include "qconv/kernels.hpp"
#include "qconv/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qconv: Q-learning convergence laboratory"};
    app.set_version_flag("--version", qconv::kVersion);

    std::string config_path;
    std::string subcommand;
    qconv::CliOverrides overrides;
    std::uint64_t seed_flag = 0;
    bool seed_set = false;
    std::string out_flag;

    const std::vector<std::string> names = {"solve",  "qlearn", "sarsa",
                                            "decompose", "bounds", "lemmas",
                                            "ripple", "pgcheck", "report"};
    for (const auto& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--seed", seed_flag, "override the config's seed list")
            ->each([&seed_set](const std::string&) { seed_set = true; });
        sub->add_option("--out", out_flag, "output directory");
        sub->add_option("--parallel", overrides.parallel,
                        "concurrent replicas (default 1)");
        sub->callback([&subcommand, name]() { subcommand = name; });
    }
    app.require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    if (seed_set) overrides.seed = seed_flag;
    if (!out_flag.empty()) overrides.out = out_flag;

    try {
        const char* lvl = std::getenv("QCONV_LOG");
        if (lvl != nullptr && std::string(lvl) == "debug")
            std::cerr << "[qconv] simd: " << qconv::kern::active_ops().name << '\n';
        return qconv::run_experiment(subcommand, config_path, overrides);
    } catch (const qconv::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}

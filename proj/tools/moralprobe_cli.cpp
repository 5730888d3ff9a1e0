#include "moralprobe/commands.hpp"
#include "moralprobe/errors.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char **argv) {
    using namespace moralprobe;
    commands::Options options;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;

    CLI::App app{"Compare survey-based and language-model moral judgements across countries"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App *cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration")->required();
        cmd->add_option("--out", out_dir, "Output directory (overrides config)");
        cmd->add_option("--seed", seed, "Global seed (overrides config)");
        cmd->add_option("--dataset", options.dataset, "Restrict to one dataset")
            ->check(CLI::IsMember({"wvs", "pew"}));
    };
    auto *ingest = app.add_subcommand("ingest", "Build empirical matrices from raw survey exports");
    auto *score = app.add_subcommand("score", "Populate the score cache for configured models");
    auto *report = app.add_subcommand("report", "Run the three methods and write all tables");
    auto *validate = app.add_subcommand("validate-config", "Check a configuration file");
    for (auto *cmd : {ingest, score, report, validate}) {
        add_common(cmd);
    }
    for (auto *cmd : {score, report}) {
        cmd->add_option("--model", options.model, "Restrict to one model id");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
    }

    options.config_path = config_path;
    if (!out_dir.empty()) {
        options.out = out_dir;
    }
    for (auto *cmd : {ingest, score, report, validate}) {
        if (cmd->count("--seed") > 0) {
            options.seed = seed;
        }
    }

    if (*ingest) {
        return commands::ingest(options, std::cout, std::cerr);
    }
    if (*score) {
        return commands::score(options, std::cout, std::cerr);
    }
    if (*report) {
        return commands::report(options, std::cout, std::cerr);
    }
    return commands::validate_config(options, std::cout, std::cerr);
}

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "relsim/config.hpp"
#include "relsim/errors.hpp"
#include "relsim/report.hpp"
#include "relsim/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"relsim - rare-event reliability estimation toolkit"};
    app.require_subcommand(1);

    std::string config_arg;
    std::uint64_t seed_value = 0;
    std::string out_value;
    auto* run = app.add_subcommand("run", "execute a run described by a config file or preset");
    run->add_option("config", config_arg,
                    "path to a run-config JSON file, or a bundled preset name")
        ->required();
    auto* seed_opt = run->add_option("--seed", seed_value, "override the config seed");
    auto* out_opt = run->add_option("--out", out_value, "override the output directory");

    std::string report_dir;
    std::string curves_out;
    auto* report = app.add_subcommand("report", "summarize run directories as a table");
    report->add_option("dir", report_dir, "directory containing estimate.json or run subdirs")
        ->required();
    report->add_option("--curves", curves_out,
                       "also export cumulative-HF-call curves to this CSV file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            relsim::RunConfig cfg = relsim::load_run_config(config_arg);
            std::optional<std::uint64_t> seed;
            std::optional<std::string> out;
            if (seed_opt->count() > 0) seed = seed_value;
            if (out_opt->count() > 0) out = out_value;
            cfg = relsim::apply_overrides(std::move(cfg), seed, out);
            return relsim::run_to_directory(cfg, std::cout);
        }
        if (report->parsed())
            return relsim::report_directory(report_dir, curves_out, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

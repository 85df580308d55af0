#pragma once

#include <map>
#include <optional>
#include <string>

#include "relsim/akmcs.hpp"
#include "relsim/coupled.hpp"
#include "relsim/subset_sim.hpp"

namespace relsim {

// Model selection block of the run-config file.
struct ModelSpec {
    std::string name;        // borehole | borehole_lf | linear | subprocess
    double threshold = 300.0;
    double distortion = 0.05;
    int dim = 2;
    double beta0 = 3.5;
    std::string command;     // subprocess only
    double cost_seconds = 0.0;
};

// Fully validated run description. `echo_json` is the normalized config with
// every default materialized; re-running it reproduces the run exactly.
struct RunConfig {
    std::string driver;      // akmcs | sus | coupled
    std::uint64_t seed = 0;
    std::string output_dir = "relsim_out";
    ModelSpec model;
    std::optional<ModelSpec> lf_model;
    std::optional<ParameterSpace> space; // explicit space (subprocess models)
    AkmcsConfig akmcs;
    SusConfig sus;
    CoupledConfig coupled;
    bool dump_surrogates = false;
    std::string echo_json;
};

// Parses and validates a config document (JSON, // comments allowed). Throws
// ConfigError naming the offending field. No model is constructed or
// evaluated here.
RunConfig parse_run_config(const std::string& json_text);

// Reads the file at `path_or_preset`, falling back to the bundled preset of
// that name when no such file exists.
RunConfig load_run_config(const std::string& path_or_preset);

// CLI overrides; keeps the config echo consistent so reruns stay exact.
RunConfig apply_overrides(RunConfig cfg, const std::optional<std::uint64_t>& seed,
                          const std::optional<std::string>& output_dir);

const std::map<std::string, std::string>& builtin_presets();

// Builds the evaluator described by a ModelSpec. For subprocess models the
// space must be supplied by the config.
std::unique_ptr<Evaluator> build_model(const ModelSpec& spec);

// The parameter space a run operates on (builtin default or explicit).
ParameterSpace build_space(const RunConfig& cfg);

} // namespace relsim

#include "relsim/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relsim/errors.hpp"

namespace relsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) fail(path + "." + key, "unknown field");
}

double get_number(const json& j, const std::string& path, const std::string& key, double def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_number()) fail(path + "." + key, "expected a number");
    return j[key].get<double>();
}

std::int64_t get_int(const json& j, const std::string& path, const std::string& key,
                     std::int64_t def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_number_integer()) fail(path + "." + key, "expected an integer");
    return j[key].get<std::int64_t>();
}

bool get_bool(const json& j, const std::string& path, const std::string& key, bool def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_boolean()) fail(path + "." + key, "expected a boolean");
    return j[key].get<bool>();
}

std::string get_string(const json& j, const std::string& path, const std::string& key,
                       const std::string& def) {
    if (!j.contains(key)) return def;
    if (!j[key].is_string()) fail(path + "." + key, "expected a string");
    return j[key].get<std::string>();
}

ModelSpec parse_model(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    check_keys(j, path,
               {"name", "threshold", "distortion", "dim", "beta0", "command", "cost_seconds"});
    ModelSpec m;
    m.name = get_string(j, path, "name", "");
    static const std::set<std::string> known{"borehole", "borehole_lf", "linear", "subprocess"};
    if (!known.count(m.name))
        fail(path + ".name", "unknown model '" + m.name +
                                 "' (expected borehole, borehole_lf, linear or subprocess)");
    m.threshold = get_number(j, path, "threshold", m.threshold);
    m.distortion = get_number(j, path, "distortion", m.distortion);
    m.dim = static_cast<int>(get_int(j, path, "dim", m.dim));
    m.beta0 = get_number(j, path, "beta0", m.beta0);
    m.command = get_string(j, path, "command", "");
    m.cost_seconds = get_number(j, path, "cost_seconds", 0.0);
    if (m.name == "linear" && m.dim < 1) fail(path + ".dim", "must be >= 1");
    if (m.name == "subprocess" && m.command.empty())
        fail(path + ".command", "required for subprocess models");
    if (!(m.cost_seconds >= 0.0)) fail(path + ".cost_seconds", "must be >= 0");
    return m;
}

MarginalDistribution parse_marginal(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    check_keys(j, path, {"name", "family", "params"});
    const std::string family = get_string(j, path, "family", "");
    if (!j.contains("params") || !j["params"].is_object())
        fail(path + ".params", "expected an object");
    const json& p = j["params"];
    const std::string ppath = path + ".params";
    try {
        if (family == "normal") {
            check_keys(p, ppath, {"mean", "std"});
            return Normal{get_number(p, ppath, "mean", 0.0), get_number(p, ppath, "std", 1.0)};
        }
        if (family == "lognormal") {
            check_keys(p, ppath, {"log_mean", "log_std"});
            return Lognormal{get_number(p, ppath, "log_mean", 0.0),
                             get_number(p, ppath, "log_std", 1.0)};
        }
        if (family == "uniform") {
            check_keys(p, ppath, {"lower", "upper"});
            return Uniform{get_number(p, ppath, "lower", 0.0),
                           get_number(p, ppath, "upper", 1.0)};
        }
        if (family == "weibull_mean") {
            check_keys(p, ppath, {"mean_strength", "modulus"});
            return WeibullByMean{get_number(p, ppath, "mean_strength", 1.0),
                                 get_number(p, ppath, "modulus", 1.0)};
        }
    } catch (const std::invalid_argument& e) {
        fail(ppath, e.what());
    }
    fail(path + ".family",
         "unknown family '" + family + "' (expected normal, lognormal, uniform, weibull_mean)");
}

GpFitOptions parse_gp_options(const json& j, const std::string& path, GpFitOptions base) {
    if (!j.is_object()) fail(path, "expected an object");
    check_keys(j, path, {"nugget"});
    base.nugget = get_number(j, path, "nugget", base.nugget);
    if (!(base.nugget >= 0.0)) fail(path + ".nugget", "must be >= 0");
    return base;
}

MlpConfig parse_mlp(const json& j, const std::string& path, MlpConfig base) {
    if (!j.is_object()) fail(path, "expected an object");
    check_keys(j, path,
               {"hidden_layers", "neurons_per_layer", "l2_lambda", "learning_rate", "epochs",
                "seed"});
    base.hidden_layers = static_cast<int>(get_int(j, path, "hidden_layers", base.hidden_layers));
    base.neurons_per_layer =
        static_cast<int>(get_int(j, path, "neurons_per_layer", base.neurons_per_layer));
    base.l2_lambda = get_number(j, path, "l2_lambda", base.l2_lambda);
    base.learning_rate = get_number(j, path, "learning_rate", base.learning_rate);
    base.epochs = static_cast<int>(get_int(j, path, "epochs", base.epochs));
    base.seed = static_cast<std::uint64_t>(get_int(j, path, "seed", 0));
    try {
        base.validate();
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    return base;
}

json echo_model(const ModelSpec& m) {
    json j;
    j["name"] = m.name;
    j["cost_seconds"] = m.cost_seconds;
    if (m.name == "borehole" || m.name == "borehole_lf") j["threshold"] = m.threshold;
    if (m.name == "borehole_lf") j["distortion"] = m.distortion;
    if (m.name == "linear") {
        j["dim"] = m.dim;
        j["beta0"] = m.beta0;
    }
    if (m.name == "subprocess") j["command"] = m.command;
    return j;
}

json echo_space(const ParameterSpace& s) {
    json arr = json::array();
    for (std::size_t d = 0; d < s.dimension(); ++d) {
        json m;
        m["name"] = s.name(d);
        m["family"] = s.marginal(d).family_name();
        json p;
        std::visit(
            [&p](const auto& dist) {
                using T = std::decay_t<decltype(dist)>;
                if constexpr (std::is_same_v<T, Normal>) {
                    p["mean"] = dist.mean;
                    p["std"] = dist.std;
                } else if constexpr (std::is_same_v<T, Lognormal>) {
                    p["log_mean"] = dist.log_mean;
                    p["log_std"] = dist.log_std;
                } else if constexpr (std::is_same_v<T, Uniform>) {
                    p["lower"] = dist.lower;
                    p["upper"] = dist.upper;
                } else {
                    p["mean_strength"] = dist.mean_strength;
                    p["modulus"] = dist.modulus;
                }
            },
            s.marginal(d).dist());
        m["params"] = p;
        arr.push_back(m);
    }
    return arr;
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(j, "config",
               {"driver", "seed", "output_dir", "model", "lf_model", "space", "akmcs", "sus",
                "coupled", "dump_surrogates"});

    RunConfig cfg;
    cfg.driver = get_string(j, "config", "driver", "");
    if (cfg.driver != "akmcs" && cfg.driver != "sus" && cfg.driver != "coupled")
        fail("config.driver", "expected akmcs, sus or coupled");
    cfg.seed = static_cast<std::uint64_t>(get_int(j, "config", "seed", 0));
    cfg.output_dir = get_string(j, "config", "output_dir", cfg.output_dir);
    cfg.dump_surrogates = get_bool(j, "config", "dump_surrogates", false);

    if (!j.contains("model")) fail("config.model", "required");
    cfg.model = parse_model(j["model"], "config.model");
    if (j.contains("lf_model")) cfg.lf_model = parse_model(j["lf_model"], "config.lf_model");

    if (j.contains("space")) {
        if (!j["space"].is_array()) fail("config.space", "expected an array of marginals");
        ParameterSpace s;
        int d = 0;
        for (const auto& m : j["space"]) {
            const std::string path = "config.space[" + std::to_string(d) + "]";
            const std::string name = get_string(m, path, "name", "x" + std::to_string(d + 1));
            try {
                s.add(name, parse_marginal(m, path));
            } catch (const std::invalid_argument& e) {
                fail(path, e.what());
            }
            ++d;
        }
        if (s.dimension() == 0) fail("config.space", "must declare at least one marginal");
        cfg.space = std::move(s);
    }
    if (cfg.model.name == "subprocess" && !cfg.space)
        fail("config.space", "required for subprocess models");
    if (cfg.space) {
        // built-ins have a fixed input dimension; an explicit space may swap
        // the marginals but not the geometry
        std::size_t expected = cfg.space->dimension();
        if (cfg.model.name == "borehole" || cfg.model.name == "borehole_lf") expected = 8;
        if (cfg.model.name == "linear") expected = static_cast<std::size_t>(cfg.model.dim);
        if (cfg.space->dimension() != expected)
            fail("config.space", "model '" + cfg.model.name + "' expects " +
                                     std::to_string(expected) + " inputs, space declares " +
                                     std::to_string(cfg.space->dimension()));
    }

    // driver blocks
    try {
        if (j.contains("akmcs")) {
            const json& a = j["akmcs"];
            const std::string path = "config.akmcs";
            check_keys(a, path,
                       {"n_initial_doe", "pool_initial", "pool_increment", "u_threshold",
                        "target_cov", "max_hf_calls", "gp"});
            cfg.akmcs.n_initial_doe =
                static_cast<int>(get_int(a, path, "n_initial_doe", cfg.akmcs.n_initial_doe));
            cfg.akmcs.pool_initial =
                static_cast<int>(get_int(a, path, "pool_initial", cfg.akmcs.pool_initial));
            cfg.akmcs.pool_increment =
                static_cast<int>(get_int(a, path, "pool_increment", cfg.akmcs.pool_increment));
            cfg.akmcs.u_threshold = get_number(a, path, "u_threshold", cfg.akmcs.u_threshold);
            cfg.akmcs.target_cov = get_number(a, path, "target_cov", cfg.akmcs.target_cov);
            cfg.akmcs.max_hf_calls = get_int(a, path, "max_hf_calls", cfg.akmcs.max_hf_calls);
            if (a.contains("gp")) cfg.akmcs.gp = parse_gp_options(a["gp"], path + ".gp", cfg.akmcs.gp);
        }
        cfg.akmcs.seed = cfg.seed;
        if (cfg.driver == "akmcs") cfg.akmcs.validate();

        if (j.contains("sus")) {
            const json& s = j["sus"];
            const std::string path = "config.sus";
            check_keys(s, path,
                       {"n_per_subset", "p0", "n_subsets", "adaptive", "max_subsets",
                        "proposal_width", "ess_corrected_cov"});
            cfg.sus.n_per_subset =
                static_cast<int>(get_int(s, path, "n_per_subset", cfg.sus.n_per_subset));
            cfg.sus.p0 = get_number(s, path, "p0", cfg.sus.p0);
            cfg.sus.n_subsets = static_cast<int>(get_int(s, path, "n_subsets", cfg.sus.n_subsets));
            cfg.sus.adaptive = get_bool(s, path, "adaptive", cfg.sus.adaptive);
            cfg.sus.max_subsets =
                static_cast<int>(get_int(s, path, "max_subsets", cfg.sus.max_subsets));
            cfg.sus.proposal_width = get_number(s, path, "proposal_width", cfg.sus.proposal_width);
            cfg.sus.ess_corrected_cov =
                get_bool(s, path, "ess_corrected_cov", cfg.sus.ess_corrected_cov);
        }
        cfg.sus.seed = cfg.seed;
        if (cfg.driver == "sus") cfg.sus.validate();

        if (j.contains("coupled")) {
            const json& c = j["coupled"];
            const std::string path = "config.coupled";
            check_keys(c, path,
                       {"n_per_subset", "p0", "n_subsets", "adaptive", "max_subsets",
                        "proposal_width", "ess_corrected_cov", "u_threshold", "n_initial",
                        "fresh_gp_per_subset", "strategy", "gp", "lf_gp", "mlp"});
            cfg.coupled.n_per_subset =
                static_cast<int>(get_int(c, path, "n_per_subset", cfg.coupled.n_per_subset));
            cfg.coupled.p0 = get_number(c, path, "p0", cfg.coupled.p0);
            cfg.coupled.n_subsets =
                static_cast<int>(get_int(c, path, "n_subsets", cfg.coupled.n_subsets));
            cfg.coupled.adaptive = get_bool(c, path, "adaptive", cfg.coupled.adaptive);
            cfg.coupled.max_subsets =
                static_cast<int>(get_int(c, path, "max_subsets", cfg.coupled.max_subsets));
            cfg.coupled.proposal_width =
                get_number(c, path, "proposal_width", cfg.coupled.proposal_width);
            cfg.coupled.ess_corrected_cov =
                get_bool(c, path, "ess_corrected_cov", cfg.coupled.ess_corrected_cov);
            cfg.coupled.u_threshold = get_number(c, path, "u_threshold", cfg.coupled.u_threshold);
            cfg.coupled.n_initial =
                static_cast<int>(get_int(c, path, "n_initial", cfg.coupled.n_initial));
            cfg.coupled.fresh_gp_per_subset =
                get_bool(c, path, "fresh_gp_per_subset", cfg.coupled.fresh_gp_per_subset);
            const std::string strat = get_string(c, path, "strategy", "gp_only");
            if (strat == "gp_only") cfg.coupled.strategy.kind = LfKind::GpOnly;
            else if (strat == "gp_lf") cfg.coupled.strategy.kind = LfKind::GpLf;
            else if (strat == "mlp_lf") cfg.coupled.strategy.kind = LfKind::MlpLf;
            else if (strat == "physics_lf") cfg.coupled.strategy.kind = LfKind::PhysicsLf;
            else fail(path + ".strategy", "expected gp_only, gp_lf, mlp_lf or physics_lf");
            if (c.contains("gp"))
                cfg.coupled.correction_gp =
                    parse_gp_options(c["gp"], path + ".gp", cfg.coupled.correction_gp);
            if (c.contains("lf_gp"))
                cfg.coupled.strategy.lf_gp =
                    parse_gp_options(c["lf_gp"], path + ".lf_gp", cfg.coupled.strategy.lf_gp);
            if (c.contains("mlp"))
                cfg.coupled.strategy.mlp = parse_mlp(c["mlp"], path + ".mlp",
                                                     cfg.coupled.strategy.mlp);
        }
        cfg.coupled.seed = cfg.seed;
        if (cfg.driver == "coupled") cfg.coupled.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config.") + cfg.driver + ": " + e.what());
    }

    if (cfg.driver == "coupled") {
        const bool physics = cfg.coupled.strategy.kind == LfKind::PhysicsLf;
        if (physics && !cfg.lf_model)
            fail("config.lf_model", "required for the physics_lf strategy");
        if (!physics && cfg.lf_model)
            fail("config.lf_model", "only used by the physics_lf strategy");
    } else if (cfg.lf_model) {
        fail("config.lf_model", "only used by the coupled driver");
    }

    // normalized echo: defaults materialized, deterministic key order
    json echo;
    echo["driver"] = cfg.driver;
    echo["seed"] = cfg.seed;
    echo["output_dir"] = cfg.output_dir;
    echo["dump_surrogates"] = cfg.dump_surrogates;
    echo["model"] = echo_model(cfg.model);
    if (cfg.lf_model) echo["lf_model"] = echo_model(*cfg.lf_model);
    if (cfg.space) echo["space"] = echo_space(*cfg.space);
    if (cfg.driver == "akmcs") {
        json a;
        a["n_initial_doe"] = cfg.akmcs.n_initial_doe;
        a["pool_initial"] = cfg.akmcs.pool_initial;
        a["pool_increment"] = cfg.akmcs.pool_increment;
        a["u_threshold"] = cfg.akmcs.u_threshold;
        a["target_cov"] = cfg.akmcs.target_cov;
        a["max_hf_calls"] = cfg.akmcs.max_hf_calls;
        a["gp"] = {{"nugget", cfg.akmcs.gp.nugget}};
        echo["akmcs"] = a;
    } else if (cfg.driver == "sus") {
        json s;
        s["n_per_subset"] = cfg.sus.n_per_subset;
        s["p0"] = cfg.sus.p0;
        s["n_subsets"] = cfg.sus.n_subsets;
        s["adaptive"] = cfg.sus.adaptive;
        s["max_subsets"] = cfg.sus.max_subsets;
        s["proposal_width"] = cfg.sus.proposal_width;
        s["ess_corrected_cov"] = cfg.sus.ess_corrected_cov;
        echo["sus"] = s;
    } else {
        json c;
        c["n_per_subset"] = cfg.coupled.n_per_subset;
        c["p0"] = cfg.coupled.p0;
        c["n_subsets"] = cfg.coupled.n_subsets;
        c["adaptive"] = cfg.coupled.adaptive;
        c["max_subsets"] = cfg.coupled.max_subsets;
        c["proposal_width"] = cfg.coupled.proposal_width;
        c["ess_corrected_cov"] = cfg.coupled.ess_corrected_cov;
        c["u_threshold"] = cfg.coupled.u_threshold;
        c["n_initial"] = cfg.coupled.n_initial;
        c["fresh_gp_per_subset"] = cfg.coupled.fresh_gp_per_subset;
        c["strategy"] = cfg.coupled.strategy.name();
        c["gp"] = {{"nugget", cfg.coupled.correction_gp.nugget}};
        if (cfg.coupled.strategy.kind == LfKind::GpLf)
            c["lf_gp"] = {{"nugget", cfg.coupled.strategy.lf_gp.nugget}};
        if (cfg.coupled.strategy.kind == LfKind::MlpLf) {
            const MlpConfig& m = cfg.coupled.strategy.mlp;
            c["mlp"] = {{"hidden_layers", m.hidden_layers},
                        {"neurons_per_layer", m.neurons_per_layer},
                        {"l2_lambda", m.l2_lambda},
                        {"learning_rate", m.learning_rate},
                        {"epochs", m.epochs},
                        {"seed", m.seed}};
        }
        echo["coupled"] = c;
    }
    cfg.echo_json = echo.dump(2);
    return cfg;
}

RunConfig apply_overrides(RunConfig cfg, const std::optional<std::uint64_t>& seed,
                          const std::optional<std::string>& output_dir) {
    json echo = json::parse(cfg.echo_json);
    if (seed) {
        cfg.seed = *seed;
        cfg.akmcs.seed = *seed;
        cfg.sus.seed = *seed;
        cfg.coupled.seed = *seed;
        echo["seed"] = *seed;
    }
    if (output_dir) {
        cfg.output_dir = *output_dir;
        echo["output_dir"] = *output_dir;
    }
    cfg.echo_json = echo.dump(2);
    return cfg;
}

RunConfig load_run_config(const std::string& path_or_preset) {
    namespace fs = std::filesystem;
    if (fs::exists(path_or_preset)) {
        std::ifstream in(path_or_preset);
        if (!in) throw ConfigError("config: cannot read '" + path_or_preset + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_run_config(ss.str());
    }
    const auto& presets = builtin_presets();
    const auto it = presets.find(path_or_preset);
    if (it == presets.end())
        throw ConfigError("config: '" + path_or_preset +
                          "' is neither a readable file nor a bundled preset");
    return parse_run_config(it->second);
}

std::unique_ptr<Evaluator> build_model(const ModelSpec& spec) {
    if (spec.name == "borehole") return make_borehole(spec.threshold, spec.cost_seconds);
    if (spec.name == "borehole_lf")
        return make_borehole_lf(spec.distortion, spec.threshold, spec.cost_seconds);
    if (spec.name == "linear") return make_linear(spec.dim, spec.beta0, spec.cost_seconds);
    if (spec.name == "subprocess") return make_subprocess(spec.command, spec.cost_seconds);
    throw ConfigError("model.name: unknown model '" + spec.name + "'");
}

ParameterSpace build_space(const RunConfig& cfg) {
    if (cfg.space) return *cfg.space;
    if (cfg.model.name == "borehole" || cfg.model.name == "borehole_lf") return borehole_space();
    if (cfg.model.name == "linear") return standard_normal_space(cfg.model.dim);
    throw ConfigError("config.space: required for model '" + cfg.model.name + "'");
}

} // namespace relsim

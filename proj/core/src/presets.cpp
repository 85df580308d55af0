#include "relsim/config.hpp"

namespace relsim {

namespace {

const char* kBoreholeAppendixA = R"json({
  // Very low failure probability on the borehole problem: coupled driver,
  // single actively learned GP, a fresh surrogate per subset.
  //
  // The rare-event variant of the borehole replaces the classic uniform
  // marginals with Gaussians (mean at the interval midpoint, sigma = range/7),
  // which puts the true P(F >= 300) near 8e-9 (importance-sampling checked).
  "driver": "coupled",
  "seed": 1,
  "output_dir": "runs/borehole_appendix_a",
  "model": {"name": "borehole", "threshold": 300.0},
  "space": [
    {"name": "r_w", "family": "normal", "params": {"mean": 0.10, "std": 0.0161812}},
    {"name": "r",   "family": "lognormal", "params": {"log_mean": 7.71, "log_std": 1.0056}},
    {"name": "T_u", "family": "normal", "params": {"mean": 89335.0, "std": 7504.2857}},
    {"name": "H_u", "family": "normal", "params": {"mean": 1050.0, "std": 17.142857}},
    {"name": "T_l", "family": "normal", "params": {"mean": 89.55, "std": 7.5571429}},
    {"name": "H_l", "family": "normal", "params": {"mean": 760.0, "std": 17.142857}},
    {"name": "L",   "family": "normal", "params": {"mean": 1400.0, "std": 80.0}},
    {"name": "K_w", "family": "normal", "params": {"mean": 10950.0, "std": 312.85714}}
  ],
  "coupled": {
    "n_per_subset": 50000,
    "p0": 0.1,
    "n_subsets": 8,
    "proposal_width": 1.0,
    "u_threshold": 2.0,
    "n_initial": 12,
    "fresh_gp_per_subset": true,
    "strategy": "gp_only"
  }
})json";

const char* kLinearSus = R"json({
  // Plain subset simulation against the analytic linear limit state:
  // P_f = Phi(-3.5) = 2.3263e-4.
  "driver": "sus",
  "seed": 7,
  "output_dir": "runs/linear_sus",
  "model": {"name": "linear", "dim": 2, "beta0": 3.5},
  "sus": {"n_per_subset": 5000, "p0": 0.1, "n_subsets": 3, "proposal_width": 1.0}
})json";

const char* kLinearAkmcs = R"json({
  // AK-MCS on the linear limit state with P_f = 0.1.
  "driver": "akmcs",
  "seed": 7,
  "output_dir": "runs/linear_akmcs",
  "model": {"name": "linear", "dim": 2, "beta0": 1.2816},
  "akmcs": {
    "n_initial_doe": 12,
    "pool_initial": 1500,
    "pool_increment": 1000,
    "u_threshold": 2.0,
    "target_cov": 0.05,
    "max_hf_calls": 2000
  }
})json";

const char* kBoreholeLfBudget = R"json({
  // Physics-based LF strategy on a synthetic borehole pair with the cost
  // asymmetry of an expensive HF model (240 s) and a cheap-but-not-free LF
  // model (11 s). Compare against an mlp_lf run for the budget ordering.
  "driver": "coupled",
  "seed": 3,
  "output_dir": "runs/borehole_lf_budget",
  "model": {"name": "borehole", "threshold": 200.0, "cost_seconds": 240.0},
  "lf_model": {"name": "borehole_lf", "distortion": 0.05, "threshold": 200.0, "cost_seconds": 11.0},
  "coupled": {
    "n_per_subset": 2000,
    "p0": 0.1,
    "n_subsets": 3,
    "u_threshold": 2.0,
    "n_initial": 12,
    "strategy": "physics_lf"
  }
})json";

const char* kAnnotatedExample = R"json({
  // Complete annotated run configuration. Comments (//) are allowed and
  // ignored by the parser. Defaults shown here are what you get when a field
  // is omitted.

  "driver": "coupled",            // akmcs | sus | coupled
  "seed": 42,                     // master seed; every stream derives from it
  "output_dir": "runs/example",   // overridable with --out
  "dump_surrogates": false,       // also write the final surrogate(s) as JSON

  // The (high fidelity) limit-state model. Built-in models:
  //   borehole    {threshold = 300, cost_seconds = 0}
  //   borehole_lf {distortion = 0.05, threshold = 300, cost_seconds = 0}
  //   linear      {dim = 2, beta0 = 3.5, cost_seconds = 0}
  //   subprocess  {command, cost_seconds}; reads one whitespace-separated
  //               sample per line on stdin, writes one scalar per line
  "model": {"name": "linear", "dim": 2, "beta0": 3.0},

  // Explicit input space: required for subprocess models, forbidden for
  // built-ins (they define their own). Families: normal {mean, std},
  // lognormal {log_mean, log_std}, uniform {lower, upper},
  // weibull_mean {mean_strength, modulus}.
  // "space": [{"name": "x1", "family": "normal", "params": {"mean": 0.0, "std": 1.0}}],

  // Driver blocks; only the selected driver's block is used.
  // "akmcs": {"n_initial_doe": 12, "pool_initial": 1500, "pool_increment": 1000,
  //           "u_threshold": 2.0, "target_cov": 0.05, "max_hf_calls": 100000,
  //           "gp": {"nugget": 1e-8}},
  // "sus":   {"n_per_subset": 5000, "p0": 0.1, "n_subsets": 4, "adaptive": false,
  //           "max_subsets": 30, "proposal_width": 1.0, "ess_corrected_cov": false},
  "coupled": {
    "n_per_subset": 5000,
    "p0": 0.1,
    "n_subsets": 3,
    "adaptive": false,            // true: run until the threshold caps at 0
    "proposal_width": 1.0,        // component-wise MH step, standard-normal units
    "u_threshold": 2.0,           // call the HF model when U drops below this
    "n_initial": 12,              // initial design size per surrogate
    "fresh_gp_per_subset": false, // retrain from scratch at each subset
    "ess_corrected_cov": false,   // also report a chain-correlation-corrected COV
    "strategy": "mlp_lf",         // gp_only | gp_lf | mlp_lf | physics_lf
    "gp": {"nugget": 1e-8},       // correction-GP noise (standardized units)
    "mlp": {"hidden_layers": 3, "neurons_per_layer": 20, "l2_lambda": 1e-3,
            "learning_rate": 0.002, "epochs": 5000}
  }
})json";

} // namespace

const std::map<std::string, std::string>& builtin_presets() {
    static const std::map<std::string, std::string> presets{
        {"borehole_appendix_a", kBoreholeAppendixA},
        {"linear_sus", kLinearSus},
        {"linear_akmcs", kLinearAkmcs},
        {"borehole_lf_budget", kBoreholeLfBudget},
        {"annotated_example", kAnnotatedExample},
    };
    return presets;
}

} // namespace relsim

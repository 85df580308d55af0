#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relsim/estimate.hpp"
#include "relsim/gp.hpp"
#include "relsim/mlp.hpp"
#include "relsim/models.hpp"
#include "relsim/subset_sim.hpp"

namespace relsim {

// Which model produces the prediction that the correction GP adjusts.
//   GpOnly:    a single GP predicts the HF output directly.
//   GpLf:      a frozen GP trained on initial HF data makes the prediction,
//              a second GP learns the discrepancy.
//   MlpLf:     same with a small neural network as the predictor.
//   PhysicsLf: an external cheap evaluator makes the prediction.
enum class LfKind { GpOnly, GpLf, MlpLf, PhysicsLf };

struct Strategy {
    LfKind kind = LfKind::GpOnly;
    MlpConfig mlp;          // MlpLf settings
    GpFitOptions lf_gp;     // GpLf settings

    std::string name() const;
};

struct CoupledConfig {
    // subset-simulation parameters
    int n_per_subset = 5000;
    double p0 = 0.1;
    int n_subsets = 4;
    bool adaptive = false;
    int max_subsets = 30;
    double proposal_width = 1.0;
    std::uint64_t seed = 0;
    bool ess_corrected_cov = false;
    // active-learning parameters
    double u_threshold = 2.0;
    int n_initial = 12;
    bool fresh_gp_per_subset = false;
    GpFitOptions correction_gp;
    Strategy strategy;

    SusConfig sus_view() const; // the embedded subset-simulation settings
    void validate() const;
};

// Subset-dependent learning function: |mean - f_i| / sigma for intermediate
// subsets, |mean| / sigma for the final one. mean is the surrogate prediction
// (y_LF + mu_eps for corrected strategies), sigma its standard deviation.
double subset_u(double mean, double sd, double f_i, bool is_final);

// Running estimate of the intermediate threshold: the (1-p0)-quantile of the
// outputs accumulated so far in the current subset (capped at 0), or
// `fallback` when fewer than two outputs exist.
double stochastic_threshold(std::span<const double> outputs_so_far, double p0,
                            double fallback);

// Per-sample record of which model produced each output and at what cost.
struct LedgerRow {
    int subset = 0;             // 0 = initial design
    std::int64_t sample_index = 0;
    char source = 'S';          // 'H' = HF model, 'S' = surrogate
    double u = 0.0;             // learning-function value (NaN when no decision was made)
    double output = 0.0;        // value recorded for this sample
    double threshold_estimate = 0.0;
    std::int64_t cumulative_hf = 0;
    double simulated_time_s = 0.0;
};

struct CallLedger {
    std::vector<LedgerRow> rows;
    std::int64_t hf_calls = 0;
    std::int64_t lf_calls = 0;
    double hf_cost_seconds = 0.0;
    double lf_cost_seconds = 0.0;

    double simulated_time_s() const {
        return static_cast<double>(hf_calls) * hf_cost_seconds +
               static_cast<double>(lf_calls) * lf_cost_seconds;
    }
};

struct CoupledResult {
    FailureEstimate estimate;
    CallLedger ledger;
    std::vector<SusSubsetSummary> subsets;
    std::string surrogate_json;     // final correction/prediction GP
    std::string lf_surrogate_json;  // frozen data-driven LF (when one exists)
};

// The coupled driver. physics_lf must be non-null exactly when the strategy
// is PhysicsLf; data-driven predictors are trained from the initial HF
// evaluations.
CoupledResult run_coupled(const ParameterSpace& space, Evaluator& hf,
                          Evaluator* physics_lf, const CoupledConfig& config);

// p = p_a * p_b with the first-order independent-product COV; call and sample
// counts are summed and the reliability index recomputed.
FailureEstimate compose_pf(const FailureEstimate& a, const FailureEstimate& b);

struct BudgetSummary {
    std::int64_t hf_calls = 0;
    std::int64_t lf_calls = 0;
    double hf_seconds = 0.0;
    double lf_seconds = 0.0;
    double total_seconds = 0.0;
};

// Simulated wall-clock budget from the ledger and the pair's cost metadata;
// surrogate retraining overhead is excluded.
BudgetSummary budget_report(const CallLedger& ledger, const ModelPair& pair);

// Aligned comparison table for several strategies' budgets.
std::string budget_table(const std::vector<std::pair<std::string, BudgetSummary>>& entries);

} // namespace relsim

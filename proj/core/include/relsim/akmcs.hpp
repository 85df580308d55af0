#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relsim/estimate.hpp"
#include "relsim/gp.hpp"
#include "relsim/models.hpp"

namespace relsim {

// Adaptive-Kriging Monte Carlo simulation for moderate failure probabilities.
struct AkmcsConfig {
    int n_initial_doe = 12;
    int pool_initial = 1500;
    int pool_increment = 1000;
    double u_threshold = 2.0;
    double target_cov = 0.05;
    std::int64_t max_hf_calls = 100000;
    std::uint64_t seed = 0;
    GpFitOptions gp;

    void validate() const;
};

// U = |mu|/sigma; +inf when sigma = 0 and mu != 0; 0 when both vanish.
double u_function(const GpPrediction& pred);

// One pooled sample's contribution to the weighted estimator: the exact
// indicator for samples the HF model evaluated, the probability that the true
// indicator equals 1 for surrogate-classified samples.
struct PfRecord {
    bool from_hf = false;
    bool indicator = false;   // predicted (surrogate) or observed (HF) failure
    double u = 0.0;           // learning-function value (surrogate records)
};

double estimate_pf_weighted(std::span<const PfRecord> records);

// sqrt((1-p)/(p n)); infinite when p = 0.
double cov_mcs(double p_f, std::int64_t n);

struct AkmcsTraceRow {
    int iteration = 0;
    int pool_size = 0;
    double min_u = 0.0;
    std::int64_t hf_calls = 0;
    double p_f = 0.0;
    double cov = 0.0;
};

struct AkmcsResult {
    FailureEstimate estimate;
    std::vector<AkmcsTraceRow> trace;
    std::string surrogate_json;  // final GP dump (training set + hyperparameters)
};

AkmcsResult run_akmcs(const ParameterSpace& space, Evaluator& evaluator,
                      const AkmcsConfig& config);

} // namespace relsim

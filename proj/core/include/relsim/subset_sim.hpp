#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "relsim/estimate.hpp"
#include "relsim/models.hpp"

namespace relsim {

// Plain subset simulation with component-wise Metropolis-Hastings in
// standard-normal space.
struct SusConfig {
    int n_per_subset = 5000;
    double p0 = 0.1;
    int n_subsets = 4;          // fixed-count mode
    bool adaptive = false;      // stop when the threshold caps at 0
    int max_subsets = 30;       // adaptive-mode safety valve
    double proposal_width = 1.0; // standard-normal units
    std::uint64_t seed = 0;
    bool ess_corrected_cov = false; // supplementary chain-correlation COV

    void validate() const;
    std::vector<std::string> warnings() const; // e.g. p0*N_n not an integer
};

// Empirical (1-p0)-quantile of the outputs with linear interpolation between
// order statistics, capped at 0 (the true threshold).
double select_threshold(std::span<const double> outputs, double p0);

// Interpolated q-quantile (same order-statistic rule as select_threshold,
// no cap).
double quantile_interpolated(std::span<const double> values, double q);

// Streaming version of the same quantile: O(log n) insert and query.
class RunningQuantile {
public:
    explicit RunningQuantile(double q);
    void push(double v);
    std::size_t count() const { return lower_.size() + upper_.size(); }
    double value() const; // requires count() >= 1

private:
    void rebalance();
    double q_;
    std::multiset<double> lower_; // the k+1 smallest values
    std::multiset<double> upper_;
};

// One component-wise MH step on the standard-normal prior. Each coordinate
// independently proposes u' = u + width*xi and accepts with probability
// min(1, phi(u')/phi(u)). The limit-state acceptance is the caller's job; a
// fully rejected proposal returns the current point unchanged.
std::vector<double> mh_step_u(const std::vector<double>& u, UniformStream& rng,
                              double proposal_width);
InputSample mh_step(const ParameterSpace& space, const InputSample& current,
                    UniformStream& rng, double proposal_width);

// sqrt((1-p)/(p n)); infinite when p = 0.
double cov_subset(double p, std::int64_t n);
// sqrt(sum delta_i^2)
double cov_overall(std::span<const double> deltas);

struct SusSubsetSummary {
    int index = 0;
    double threshold = 0.0;      // F_i (0 for the final subset)
    double p_cond = 0.0;         // P_1 or P_{i|i-1}
    double cov = 0.0;            // Au-Beck per-subset COV
    std::int64_t n = 0;
    bool is_final = false;
};

struct SusTraceRow {
    int subset = 0;
    std::int64_t sample_index = 0;
    double output = 0.0;
    bool is_seed = false;
    bool accepted = false;
};

struct SusResult {
    FailureEstimate estimate;
    std::vector<SusSubsetSummary> subsets;
    std::vector<SusTraceRow> trace;
};

// Product of the per-subset probabilities with the overall COV; degenerate
// (zero) subsets yield p = 0 with infinite COV.
FailureEstimate combine_subsets(const std::vector<SusSubsetSummary>& subsets);

SusResult run_sus(const ParameterSpace& space, Evaluator& evaluator, const SusConfig& config);

// Chain-length plan: n_total samples across n_seeds chains (seed included in
// each chain's length), remainders assigned to the first chains.
std::vector<int> plan_chain_lengths(int n_seeds, int n_total);

} // namespace relsim

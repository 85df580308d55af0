#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace relsim {

// Common result record for every driver. beta is absent unless 0 < p_f < 1
// (reported as "n/a" downstream).
struct FailureEstimate {
    double p_f = 0.0;
    double cov = 0.0;
    std::optional<double> beta;
    std::int64_t hf_calls = 0;
    std::int64_t lf_calls = 0;
    std::int64_t total_samples = 0;
    bool converged = false;
    std::string flag;                 // empty, "degenerate", "max_hf_calls", ...
    std::optional<double> cov_ess;    // chain-correlation-corrected COV, when requested
    double simulated_time_s = 0.0;
};

// -PhiInv(p_f) for p_f strictly inside (0,1); empty otherwise.
std::optional<double> reliability_index(double p_f);

} // namespace relsim

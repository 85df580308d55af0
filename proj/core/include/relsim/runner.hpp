#pragma once

#include <iosfwd>
#include <string>

#include "relsim/config.hpp"

namespace relsim {

// Everything a run produces, before any filesystem I/O.
struct RunOutputs {
    FailureEstimate estimate;
    std::string estimate_json;   // estimate + config echo, byte-stable
    std::string trace_csv;       // driver trace (akmcs/sus) or call ledger (coupled)
    std::string trace_filename;  // "trace.csv" or "ledger.csv"
    std::string summary_text;
    std::string surrogate_json;     // final surrogate dump (may be empty)
    std::string lf_surrogate_json;  // frozen data-driven LF dump (may be empty)
    int exit_code = 1;              // 0 converged, 2 flagged, 1 error
};

RunOutputs execute_run(const RunConfig& cfg);

// Executes and writes estimate.json, the trace/ledger CSV and summary.txt
// into cfg.output_dir (created if needed). Returns the exit code.
int run_to_directory(const RunConfig& cfg, std::ostream& log);

} // namespace relsim

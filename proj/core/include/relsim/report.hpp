#pragma once

#include <iosfwd>
#include <string>

namespace relsim {

// Builds an aligned comparison table from every estimate.json found directly
// in `dir` or in its immediate subdirectories. Unreadable files produce
// per-file warnings on `log`; returns nonzero when none were readable.
//
// When `curves_csv_out` is non-empty, also derives the cumulative-HF-call
// curves (per in-subset sample index, summed across subsets) from each run's
// ledger.csv and writes them as one CSV.
int report_directory(const std::string& dir, const std::string& curves_csv_out,
                     std::ostream& out, std::ostream& log);

} // namespace relsim

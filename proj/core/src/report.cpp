#include "relsim/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace relsim {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunEntry {
    std::string name;
    fs::path dir;
    json estimate;
};

std::optional<json> read_estimate(const fs::path& file, std::ostream& log) {
    std::ifstream in(file);
    if (!in) {
        log << "warning: cannot read " << file.string() << '\n';
        return std::nullopt;
    }
    try {
        json j;
        in >> j;
        if (!j.contains("p_f")) {
            log << "warning: " << file.string() << " has no p_f field\n";
            return std::nullopt;
        }
        return j;
    } catch (const std::exception& e) {
        log << "warning: " << file.string() << ": " << e.what() << '\n';
        return std::nullopt;
    }
}

std::string cell(const json& j, const std::string& key, bool scientific = false) {
    if (!j.contains(key) || j[key].is_null()) return "n/a";
    const json& v = j[key];
    std::ostringstream os;
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
    if (v.is_number_integer()) {
        os << v.get<std::int64_t>();
        return os.str();
    }
    if (scientific)
        os << std::scientific << std::setprecision(3) << v.get<double>();
    else
        os << std::setprecision(4) << v.get<double>();
    return os.str();
}

// cumulative HF calls per in-subset sample index, summed across subsets
std::optional<std::map<std::int64_t, std::int64_t>> hf_curve(const fs::path& ledger,
                                                             std::ostream& log) {
    std::ifstream in(ledger);
    if (!in) {
        log << "warning: " << ledger.string() << " not found; run skipped in curves export\n";
        return std::nullopt;
    }
    std::string header;
    std::getline(in, header);
    std::map<std::int64_t, std::int64_t> calls_at; // per sample index (subsets added)
    std::int64_t prev_cum = 0;
    std::int64_t base_calls = 0; // initial-design rows (subset 0)
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string field;
        std::getline(ls, field, ',');
        const int subset = std::stoi(field);
        std::getline(ls, field, ',');
        const std::int64_t idx = std::stoll(field);
        for (int skip = 0; skip < 4; ++skip) std::getline(ls, field, ',');
        std::getline(ls, field, ',');
        const std::int64_t cum = std::stoll(field);
        const std::int64_t delta = cum - prev_cum;
        prev_cum = cum;
        if (delta <= 0) continue;
        if (subset == 0)
            base_calls += delta;
        else
            calls_at[idx] += delta;
    }
    // cumulative over the sample index; the design calls are the offset at 0
    calls_at[0] += 0;
    std::map<std::int64_t, std::int64_t> curve;
    std::int64_t acc = base_calls;
    for (const auto& [idx, c] : calls_at) {
        acc += c;
        curve[idx] = acc;
    }
    return curve;
}

} // namespace

int report_directory(const std::string& dir, const std::string& curves_csv_out,
                     std::ostream& out, std::ostream& log) {
    std::vector<RunEntry> runs;
    const fs::path root(dir);
    if (!fs::exists(root)) {
        log << "error: directory '" << dir << "' does not exist\n";
        return 1;
    }
    if (fs::exists(root / "estimate.json")) {
        if (auto j = read_estimate(root / "estimate.json", log))
            runs.push_back({root.filename().string(), root, std::move(*j)});
    }
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "estimate.json"))
            subdirs.push_back(entry.path());
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& sub : subdirs)
        if (auto j = read_estimate(sub / "estimate.json", log))
            runs.push_back({sub.filename().string(), sub, std::move(*j)});

    if (runs.empty()) {
        log << "error: no readable estimate.json under '" << dir << "'\n";
        return 1;
    }

    const std::vector<std::pair<std::string, std::string>> rows = {
        {"driver", "driver"},         {"strategy", "strategy"}, {"P_f", "p_f"},
        {"COV", "cov"},               {"beta", "beta"},         {"# HF calls", "hf_calls"},
        {"# LF calls", "lf_calls"},   {"# samples", "total_samples"},
        {"sim. time [s]", "simulated_time_s"},                  {"converged", "converged"},
    };

    std::size_t label_w = 0;
    for (const auto& r : rows) label_w = std::max(label_w, r.first.size());
    std::vector<std::size_t> col_w(runs.size());
    std::vector<std::vector<std::string>> cells(rows.size(), std::vector<std::string>(runs.size()));
    for (std::size_t c = 0; c < runs.size(); ++c) {
        col_w[c] = runs[c].name.size();
        for (std::size_t r = 0; r < rows.size(); ++r) {
            cells[r][c] = cell(runs[c].estimate, rows[r].second, rows[r].second == "p_f");
            col_w[c] = std::max(col_w[c], cells[r][c].size());
        }
    }

    out << std::left << std::setw(static_cast<int>(label_w) + 2) << "";
    for (std::size_t c = 0; c < runs.size(); ++c)
        out << std::right << std::setw(static_cast<int>(col_w[c]) + 2) << runs[c].name;
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << std::left << std::setw(static_cast<int>(label_w) + 2) << rows[r].first;
        for (std::size_t c = 0; c < runs.size(); ++c)
            out << std::right << std::setw(static_cast<int>(col_w[c]) + 2) << cells[r][c];
        out << '\n';
    }

    if (!curves_csv_out.empty()) {
        std::vector<std::pair<std::string, std::map<std::int64_t, std::int64_t>>> curves;
        for (const auto& run : runs)
            if (auto c = hf_curve(run.dir / "ledger.csv", log))
                curves.emplace_back(run.name, std::move(*c));
        if (curves.empty()) {
            log << "warning: no ledgers found, curves file not written\n";
        } else {
            std::ofstream csv(curves_csv_out);
            csv << "sample_index";
            for (const auto& [name, _] : curves) csv << ',' << name;
            csv << '\n';
            std::vector<std::int64_t> indices;
            for (const auto& [_, curve] : curves)
                for (const auto& [idx, __] : curve) indices.push_back(idx);
            std::sort(indices.begin(), indices.end());
            indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
            for (std::int64_t idx : indices) {
                csv << idx;
                for (std::size_t c = 0; c < curves.size(); ++c) {
                    auto it = curves[c].second.upper_bound(idx);
                    const std::int64_t v =
                        it == curves[c].second.begin() ? 0 : std::prev(it)->second;
                    csv << ',' << v;
                }
                csv << '\n';
            }
            log << "curves written to " << curves_csv_out << '\n';
        }
    }
    return 0;
}

} // namespace relsim

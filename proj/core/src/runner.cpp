#include "relsim/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relsim/errors.hpp"

namespace relsim {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

json estimate_to_json(const FailureEstimate& e, const RunConfig& cfg,
                      const std::string& strategy) {
    json j;
    j["p_f"] = e.p_f;
    j["cov"] = std::isfinite(e.cov) ? json(e.cov) : json("inf");
    if (e.beta) j["beta"] = *e.beta;
    else j["beta"] = nullptr;
    if (e.cov_ess) j["cov_ess"] = *e.cov_ess;
    j["hf_calls"] = e.hf_calls;
    j["lf_calls"] = e.lf_calls;
    j["total_samples"] = e.total_samples;
    j["converged"] = e.converged;
    j["flag"] = e.flag;
    j["simulated_time_s"] = e.simulated_time_s;
    j["driver"] = cfg.driver;
    j["strategy"] = strategy;
    j["seed"] = cfg.seed;
    j["config"] = json::parse(cfg.echo_json);
    return j;
}

std::string subsets_block(const std::vector<SusSubsetSummary>& subsets) {
    std::ostringstream os;
    os << "  subset   threshold      P_cond     COV\n";
    for (const auto& s : subsets) {
        os << "  " << std::setw(6) << s.index << "  " << std::setw(10) << std::setprecision(6)
           << s.threshold << "  " << std::setw(10) << std::setprecision(6) << s.p_cond << "  "
           << std::setw(6) << std::setprecision(4) << s.cov << (s.is_final ? "  (final)" : "")
           << '\n';
    }
    return os.str();
}

std::string estimate_block(const FailureEstimate& e) {
    std::ostringstream os;
    os << "  P_f            = " << std::setprecision(6) << std::scientific << e.p_f << '\n'
       << std::defaultfloat;
    os << "  COV            = " << std::setprecision(4) << e.cov;
    if (e.cov_ess) os << "  (chain-corrected: " << std::setprecision(4) << *e.cov_ess << ")";
    os << '\n';
    os << "  beta           = ";
    if (e.beta) os << std::setprecision(4) << *e.beta;
    else os << "n/a";
    os << '\n';
    os << "  HF calls       = " << e.hf_calls << '\n';
    if (e.lf_calls > 0) os << "  LF calls       = " << e.lf_calls << '\n';
    os << "  total samples  = " << e.total_samples << '\n';
    os << "  simulated time = " << std::setprecision(6) << e.simulated_time_s << " s\n";
    os << "  converged      = " << (e.converged ? "yes" : "no");
    if (!e.flag.empty()) os << "  [" << e.flag << "]";
    os << '\n';
    return os.str();
}

} // namespace

RunOutputs execute_run(const RunConfig& cfg) {
    RunOutputs out;
    const ParameterSpace space = build_space(cfg);
    auto model = build_model(cfg.model);

    std::string strategy = cfg.driver;
    std::ostringstream summary;
    summary << "relsim run: driver=" << cfg.driver << " model=" << cfg.model.name
            << " seed=" << cfg.seed << "\n\n";

    if (cfg.driver == "akmcs") {
        const AkmcsResult res = run_akmcs(space, *model, cfg.akmcs);
        out.estimate = res.estimate;
        out.surrogate_json = res.surrogate_json;
        std::ostringstream csv;
        csv << "iteration,pool_size,min_u,hf_calls,p_f,cov\n";
        for (const auto& r : res.trace)
            csv << r.iteration << ',' << r.pool_size << ',' << fmt(r.min_u) << ',' << r.hf_calls
                << ',' << fmt(r.p_f) << ',' << fmt(r.cov) << '\n';
        out.trace_csv = csv.str();
        out.trace_filename = "trace.csv";
        summary << estimate_block(res.estimate);
    } else if (cfg.driver == "sus") {
        const SusResult res = run_sus(space, *model, cfg.sus);
        out.estimate = res.estimate;
        std::ostringstream csv;
        csv << "subset,sample_index,output,is_seed,accepted\n";
        for (const auto& r : res.trace)
            csv << r.subset << ',' << r.sample_index << ',' << fmt(r.output) << ','
                << (r.is_seed ? 1 : 0) << ',' << (r.accepted ? 1 : 0) << '\n';
        out.trace_csv = csv.str();
        out.trace_filename = "trace.csv";
        summary << estimate_block(res.estimate) << '\n' << subsets_block(res.subsets);
    } else if (cfg.driver == "coupled") {
        std::unique_ptr<Evaluator> lf;
        if (cfg.lf_model) lf = build_model(*cfg.lf_model);
        strategy = cfg.coupled.strategy.name();
        const CoupledResult res = run_coupled(space, *model, lf.get(), cfg.coupled);
        out.estimate = res.estimate;
        out.surrogate_json = res.surrogate_json;
        out.lf_surrogate_json = res.lf_surrogate_json;
        std::ostringstream csv;
        csv << "subset,sample_index,source,u_value,output,threshold_estimate,"
               "cumulative_hf_calls,simulated_time_s\n";
        for (const auto& r : res.ledger.rows)
            csv << r.subset << ',' << r.sample_index << ','
                << (r.source == 'H' ? "HF" : "surrogate") << ',' << fmt(r.u) << ','
                << fmt(r.output) << ',' << fmt(r.threshold_estimate) << ',' << r.cumulative_hf
                << ',' << fmt(r.simulated_time_s) << '\n';
        out.trace_csv = csv.str();
        out.trace_filename = "ledger.csv";
        summary << estimate_block(res.estimate) << '\n' << subsets_block(res.subsets);
        ModelPair pair{model.get(), lf.get()};
        const BudgetSummary budget = budget_report(res.ledger, pair);
        summary << "\nbudget (retraining overhead excluded):\n"
                << budget_table({{strategy, budget}});
    } else {
        throw ConfigError("config.driver: unknown driver '" + cfg.driver + "'");
    }

    out.estimate_json = estimate_to_json(out.estimate, cfg, strategy).dump(2) + "\n";
    out.summary_text = summary.str();
    out.exit_code = out.estimate.converged ? 0 : 2;
    return out;
}

int run_to_directory(const RunConfig& cfg, std::ostream& log) {
    namespace fs = std::filesystem;
    if (cfg.driver == "sus")
        for (const auto& w : cfg.sus.warnings()) log << "warning: " << w << '\n';
    if (cfg.driver == "coupled")
        for (const auto& w : cfg.coupled.sus_view().warnings()) log << "warning: " << w << '\n';

    const RunOutputs out = execute_run(cfg);

    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    std::ofstream(dir / "estimate.json") << out.estimate_json;
    std::ofstream(dir / out.trace_filename) << out.trace_csv;
    std::ofstream(dir / "summary.txt") << out.summary_text;
    if (cfg.dump_surrogates && !out.surrogate_json.empty())
        std::ofstream(dir / "surrogate.json") << out.surrogate_json;
    if (cfg.dump_surrogates && !out.lf_surrogate_json.empty())
        std::ofstream(dir / "lf_surrogate.json") << out.lf_surrogate_json;

    log << out.summary_text;
    log << "artifacts written to " << dir.string() << '\n';
    return out.exit_code;
}

} // namespace relsim

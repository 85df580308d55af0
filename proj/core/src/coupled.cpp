#include "relsim/coupled.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "relsim/normal.hpp"

namespace relsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd to_vector(const InputSample& x) {
    return Eigen::Map<const Eigen::VectorXd>(x.values.data(),
                                             static_cast<Eigen::Index>(x.values.size()));
}
} // namespace

std::string Strategy::name() const {
    switch (kind) {
        case LfKind::GpOnly: return "gp_only";
        case LfKind::GpLf: return "gp_lf";
        case LfKind::MlpLf: return "mlp_lf";
        case LfKind::PhysicsLf: return "physics_lf";
    }
    return "unknown";
}

SusConfig CoupledConfig::sus_view() const {
    SusConfig s;
    s.n_per_subset = n_per_subset;
    s.p0 = p0;
    s.n_subsets = n_subsets;
    s.adaptive = adaptive;
    s.max_subsets = max_subsets;
    s.proposal_width = proposal_width;
    s.seed = seed;
    s.ess_corrected_cov = ess_corrected_cov;
    return s;
}

void CoupledConfig::validate() const {
    sus_view().validate();
    if (!(u_threshold > 0.0)) throw std::invalid_argument("coupled.u_threshold: must be > 0");
    if (n_initial < 1) throw std::invalid_argument("coupled.n_initial: must be >= 1");
    strategy.mlp.validate();
}

double subset_u(double mean, double sd, double f_i, bool is_final) {
    if (sd < 0.0) throw std::invalid_argument("subset_u: sd must be >= 0");
    if (!is_final && !std::isfinite(f_i))
        throw std::invalid_argument("subset_u: f_i must be finite for intermediate subsets");
    const double num = std::abs(is_final ? mean : mean - f_i);
    if (sd == 0.0) return num == 0.0 ? 0.0 : kInf;
    return num / sd;
}

double stochastic_threshold(std::span<const double> outputs_so_far, double p0,
                            double fallback) {
    if (!(p0 > 0.0 && p0 < 1.0))
        throw std::invalid_argument("stochastic_threshold: p0 must be in (0,1)");
    if (outputs_so_far.size() < 2) return fallback;
    return std::min(quantile_interpolated(outputs_so_far, 1.0 - p0), 0.0);
}

namespace {

// The prediction/learning side of the coupled driver: either one GP learning
// the HF output directly, or a frozen LF predictor plus a GP learning the
// discrepancy eps = y_HF - y_LF.
class ActiveSurrogate {
public:
    ActiveSurrogate(LfKind kind, CallLedger& ledger) : kind_(kind), ledger_(ledger) {}

    LfKind kind() const { return kind_; }
    bool ready() const { return gp_.has_value(); }
    Eigen::Index training_size() const { return gp_ ? gp_->size() : 0; }

    void set_lf(GpModel lf) { lf_gp_ = std::move(lf); }
    void set_lf(MlpModel lf) { lf_mlp_ = std::move(lf); }
    void set_lf(Evaluator* lf) { physics_lf_ = lf; }

    double lf_value(const InputSample& x) {
        switch (kind_) {
            case LfKind::GpOnly: return 0.0;
            case LfKind::GpLf: ++ledger_.lf_calls; return lf_gp_->predict(to_vector(x)).mean;
            case LfKind::MlpLf: ++ledger_.lf_calls; return lf_mlp_->predict(to_vector(x));
            case LfKind::PhysicsLf: ++ledger_.lf_calls; return physics_lf_->evaluate(x);
        }
        return 0.0;
    }

    struct Pred {
        double mean;
        double sd;
        double y_lf;
    };

    Pred predict(const InputSample& x) {
        const double y_lf = lf_value(x);
        const GpPrediction p = gp_->predict(to_vector(x));
        if (kind_ == LfKind::GpOnly) return {p.mean, p.sd, 0.0};
        return {y_lf + p.mean, p.sd, y_lf};
    }

    // y_lf must be the value computed for this same x by predict()
    void learn(const InputSample& x, double y_hf, double y_lf) {
        const double target = kind_ == LfKind::GpOnly ? y_hf : y_hf - y_lf;
        gp_->add_point(to_vector(x), target, /*refit_hyperparams=*/true);
    }

    void fit_fresh(const std::vector<InputSample>& xs, const std::vector<double>& targets,
                   const GpFitOptions& opts) {
        const auto n = static_cast<Eigen::Index>(xs.size());
        const auto dim = static_cast<Eigen::Index>(xs.front().values.size());
        Eigen::MatrixXd X(n, dim);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            X.row(i) = to_vector(xs[i]).transpose();
            y[i] = targets[i];
        }
        gp_ = GpModel::fit(X, y, opts);
    }

    const GpModel* correction() const { return gp_ ? &*gp_ : nullptr; }
    const GpModel* lf_gp() const { return lf_gp_ ? &*lf_gp_ : nullptr; }
    const MlpModel* lf_mlp() const { return lf_mlp_ ? &*lf_mlp_ : nullptr; }
    void reset_gp() { gp_.reset(); }

private:
    LfKind kind_;
    CallLedger& ledger_;
    std::optional<GpModel> gp_;
    std::optional<GpModel> lf_gp_;
    std::optional<MlpModel> lf_mlp_;
    Evaluator* physics_lf_ = nullptr;
};

struct ChainState {
    InputSample x;
    std::vector<double> u;
    double output = 0.0;
    char tag = 'S'; // which model produced the output
};

// Au-Beck correlation factor for the supplementary COV (shared shape with
// the plain driver; duplicated here to keep both drivers self-contained).
double chain_gamma(const std::vector<std::vector<char>>& chains, double p,
                   std::int64_t n_total) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    const double r0 = p * (1.0 - p);
    std::size_t max_len = 0;
    for (const auto& c : chains) max_len = std::max(max_len, c.size());
    double gamma = 0.0;
    for (std::size_t k = 1; k < max_len; ++k) {
        double acc = 0.0;
        std::int64_t terms = 0;
        for (const auto& c : chains) {
            if (c.size() <= k) continue;
            for (std::size_t j = 0; j + k < c.size(); ++j)
                acc += static_cast<double>(c[j]) * static_cast<double>(c[j + k]);
            terms += static_cast<std::int64_t>(c.size() - k);
        }
        if (terms == 0) break;
        const double rk = acc / static_cast<double>(terms) - p * p;
        gamma += 2.0 * (static_cast<double>(terms) / static_cast<double>(n_total)) * (rk / r0);
    }
    return std::max(gamma, 0.0);
}

} // namespace

CoupledResult run_coupled(const ParameterSpace& space, Evaluator& hf, Evaluator* physics_lf,
                          const CoupledConfig& config) {
    config.validate();
    if ((config.strategy.kind == LfKind::PhysicsLf) != (physics_lf != nullptr))
        throw std::invalid_argument(
            "run_coupled: a physics LF evaluator is required exactly for the physics_lf strategy");

    CoupledResult result;
    CallLedger& ledger = result.ledger;
    ledger.hf_cost_seconds = hf.cost_seconds();
    ledger.lf_cost_seconds = physics_lf ? physics_lf->cost_seconds() : 0.0;
    const std::int64_t hf_calls_before = hf.call_count();

    ActiveSurrogate surrogate(config.strategy.kind, ledger);
    if (physics_lf) surrogate.set_lf(physics_lf);

    auto hf_call = [&](const InputSample& x) {
        ++ledger.hf_calls;
        return hf.evaluate(x);
    };
    auto push_row = [&](int subset, std::int64_t idx, char source, double u, double output,
                        double thr) {
        ledger.rows.push_back(
            {subset, idx, source, u, output, thr, ledger.hf_calls, ledger.simulated_time_s()});
    };

    // --- initial design -----------------------------------------------------
    RandomStream doe_rng(derive_seed(config.seed, 0xd0e));
    double doe_min = kInf;
    std::int64_t doe_idx = 0;

    auto evaluate_doe_batch = [&](const std::vector<InputSample>& batch,
                                  std::vector<double>& out_y) {
        for (const auto& x : batch) {
            const double y = hf_call(x);
            out_y.push_back(y);
            doe_min = std::min(doe_min, y);
            push_row(0, doe_idx++, 'H', kNaN, y, kNaN);
        }
    };

    {
        const auto batch1 = latin_hypercube(space, config.n_initial, doe_rng);
        std::vector<double> y1;
        y1.reserve(batch1.size());
        evaluate_doe_batch(batch1, y1);

        switch (config.strategy.kind) {
            case LfKind::GpOnly: {
                surrogate.fit_fresh(batch1, y1, config.correction_gp);
                break;
            }
            case LfKind::PhysicsLf: {
                std::vector<double> eps(batch1.size());
                for (std::size_t i = 0; i < batch1.size(); ++i)
                    eps[i] = y1[i] - surrogate.lf_value(batch1[i]);
                surrogate.fit_fresh(batch1, eps, config.correction_gp);
                break;
            }
            case LfKind::GpLf:
            case LfKind::MlpLf: {
                // train the data-driven LF on the first batch, then the
                // correction on a fresh batch (the LF interpolates its own
                // training points, which would make the discrepancy there
                // identically zero)
                const auto n = static_cast<Eigen::Index>(batch1.size());
                const auto dim = static_cast<Eigen::Index>(space.dimension());
                Eigen::MatrixXd X(n, dim);
                Eigen::VectorXd yv(n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    X.row(i) = to_vector(batch1[i]).transpose();
                    yv[i] = y1[i];
                }
                if (config.strategy.kind == LfKind::GpLf) {
                    surrogate.set_lf(GpModel::fit(X, yv, config.strategy.lf_gp));
                } else {
                    MlpConfig mc = config.strategy.mlp;
                    if (mc.seed == 0) mc.seed = derive_seed(config.seed, 0x6d6c66);
                    surrogate.set_lf(mlp_train(X, yv, mc));
                }
                const auto batch2 = latin_hypercube(space, config.n_initial, doe_rng);
                std::vector<double> y2;
                y2.reserve(batch2.size());
                evaluate_doe_batch(batch2, y2);
                std::vector<double> eps(batch2.size());
                for (std::size_t i = 0; i < batch2.size(); ++i)
                    eps[i] = y2[i] - surrogate.lf_value(batch2[i]);
                surrogate.fit_fresh(batch2, eps, config.correction_gp);
                break;
            }
        }
    }

    // --- subset loop ----------------------------------------------------------
    const int n = config.n_per_subset;
    const auto n_seed_target = static_cast<int>(std::ceil(config.p0 * n));
    const int subsets_cap = config.adaptive ? config.max_subsets : config.n_subsets;

    std::vector<ChainState> seeds;
    std::vector<double> ess_deltas;
    double prev_threshold = -kInf;
    bool stop = false;
    bool reached_final = false;
    std::string flag;

    for (int si = 1; si <= subsets_cap && !stop; ++si) {
        const bool declared_final = !config.adaptive && si == config.n_subsets;
        const double fallback = si == 1 ? doe_min : prev_threshold;
        RunningQuantile rq(1.0 - config.p0);
        std::vector<ChainState> states;
        std::vector<double> outputs;
        states.reserve(n);
        outputs.reserve(n);
        std::vector<std::vector<double>> chain_outputs;

        // Fresh surrogate per subset: discard the trained model and refit on
        // n_initial new HF evaluations, split between the subset's own seed
        // states and a space-filling batch. The seed half anchors the level
        // the chains move on; the global half keeps the prior variance honest
        // so the learning function stays alert near the failure threshold.
        // Either half alone breaks down: band-only designs go overconfident
        // in the final subset, global-only designs freeze the chains.
        if (config.fresh_gp_per_subset && si >= 2) {
            surrogate.reset_gp();
            const int n_band = std::min<int>(config.n_initial / 2,
                                             static_cast<int>(seeds.size()));
            const int n_global = config.n_initial - n_band;
            std::vector<InputSample> xs;
            std::vector<double> targets;
            auto add_pair = [&](const InputSample& x, double y) {
                const double y_lf =
                    config.strategy.kind == LfKind::GpOnly ? 0.0 : surrogate.lf_value(x);
                xs.push_back(x);
                targets.push_back(config.strategy.kind == LfKind::GpOnly ? y : y - y_lf);
                push_row(0, doe_idx++, 'H', kNaN, y, kNaN);
            };
            for (int c = 0; c < n_band; ++c) {
                const double y = hf_call(seeds[c].x);
                seeds[c].output = y; // refine the chain state with the exact value
                seeds[c].tag = 'H';
                add_pair(seeds[c].x, y);
            }
            RandomStream fresh_rng(
                derive_seed(config.seed, 0xd0e, static_cast<std::uint64_t>(si)));
            for (const auto& x : latin_hypercube(space, n_global, fresh_rng)) {
                add_pair(x, hf_call(x));
            }
            surrogate.fit_fresh(xs, targets, config.correction_gp);
        }

        auto running_threshold = [&]() {
            if (rq.count() < 2) return fallback;
            return std::min(rq.value(), 0.0);
        };

        auto record = [&](std::int64_t idx, char source, double u, double recorded,
                          double thr, const ChainState& state, int chain /*-1 for MC*/) {
            push_row(si, idx, source, u, recorded, thr);
            outputs.push_back(recorded);
            rq.push(recorded);
            states.push_back(state);
            if (config.ess_corrected_cov && chain >= 0)
                chain_outputs[static_cast<std::size_t>(chain)].push_back(recorded);
        };

        if (si == 1) {
            if (config.ess_corrected_cov) chain_outputs.resize(1);
            RandomStream rng(derive_seed(config.seed, 1, 0));
            for (int i = 0; i < n; ++i) {
                InputSample x = sample(space, rng);
                const double thr = running_threshold();
                const auto pred = surrogate.predict(x);
                const double u = subset_u(pred.mean, pred.sd, declared_final ? 0.0 : thr,
                                          declared_final);
                char source = 'S';
                double y = pred.mean;
                if (u < config.u_threshold) {
                    y = hf_call(x);
                    surrogate.learn(x, y, pred.y_lf);
                    source = 'H';
                }
                ChainState st{std::move(x), {}, y, source};
                record(i, source, u, y, declared_final ? 0.0 : thr, st,
                       config.ess_corrected_cov ? 0 : -1);
            }
        } else {
            const int n_chains = static_cast<int>(seeds.size());
            const std::vector<int> lengths = plan_chain_lengths(n_chains, n);
            std::vector<RandomStream> streams;
            streams.reserve(n_chains);
            for (int c = 0; c < n_chains; ++c)
                streams.emplace_back(derive_seed(config.seed, static_cast<std::uint64_t>(si),
                                                 1000 + static_cast<std::uint64_t>(c)));
            std::vector<ChainState> cur = seeds;
            if (config.ess_corrected_cov) chain_outputs.resize(n_chains);
            std::int64_t idx = 0;

            // the seeds are the subset's first samples
            for (int c = 0; c < n_chains; ++c)
                record(idx++, cur[c].tag, kNaN, cur[c].output, kNaN, cur[c], c);

            int max_steps = 0;
            for (int c = 0; c < n_chains; ++c) max_steps = std::max(max_steps, lengths[c] - 1);
            for (int step = 0; step < max_steps; ++step) {
                for (int c = 0; c < n_chains; ++c) {
                    if (step >= lengths[c] - 1) continue;
                    const std::vector<double> u_cand =
                        mh_step_u(cur[c].u, streams[c], config.proposal_width);
                    if (u_cand == cur[c].u) {
                        // every component rejected: the chain repeats, no call
                        record(idx++, cur[c].tag, kNaN, cur[c].output, kNaN, cur[c], c);
                        continue;
                    }
                    InputSample x_cand = from_standard_normal(space, u_cand);
                    char source;
                    double y;
                    const double thr = running_threshold();
                    const auto pred = surrogate.predict(x_cand);
                    const double thr_used = declared_final ? 0.0 : thr;
                    const double u_val = subset_u(pred.mean, pred.sd, thr_used, declared_final);
                    if (u_val < config.u_threshold) {
                        y = hf_call(x_cand);
                        surrogate.learn(x_cand, y, pred.y_lf);
                        source = 'H';
                    } else {
                        y = pred.mean;
                        source = 'S';
                    }
                    const bool accepted = y > prev_threshold;
                    if (accepted) cur[c] = ChainState{std::move(x_cand), u_cand, y, source};
                    record(idx++, source, u_val, cur[c].output, thr_used, cur[c], c);
                }
            }
        }

        double threshold = select_threshold(outputs, config.p0);
        const bool is_final = declared_final || threshold >= 0.0;
        if (is_final && !declared_final && !config.adaptive) flag = "threshold_capped_early";
        if (is_final) threshold = 0.0;

        std::int64_t exceed = 0;
        for (double g : outputs)
            exceed += is_final ? (g >= 0.0 ? 1 : 0) : (g > threshold ? 1 : 0);
        const double p_cond = static_cast<double>(exceed) / static_cast<double>(n);
        result.subsets.push_back({si, threshold, p_cond, cov_subset(p_cond, n), n, is_final});

        if (config.ess_corrected_cov && p_cond > 0.0) {
            std::vector<std::vector<char>> ind(chain_outputs.size());
            for (std::size_t c = 0; c < chain_outputs.size(); ++c) {
                ind[c].reserve(chain_outputs[c].size());
                for (double g : chain_outputs[c])
                    ind[c].push_back(is_final ? (g >= 0.0) : (g > threshold));
            }
            const double gamma = si == 1 ? 0.0 : chain_gamma(ind, p_cond, n);
            ess_deltas.push_back(result.subsets.back().cov * std::sqrt(1.0 + gamma));
        }

        if (p_cond == 0.0) {
            stop = true;
            flag = "degenerate";
        } else if (is_final) {
            stop = true;
            reached_final = true;
        } else {
            std::vector<std::size_t> order(states.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return outputs[a] > outputs[b];
            });
            std::vector<std::size_t> picked;
            for (std::size_t r = 0;
                 r < order.size() && static_cast<int>(picked.size()) < n_seed_target; ++r)
                if (outputs[order[r]] > threshold) picked.push_back(order[r]);
            if (picked.empty()) {
                stop = true;
                flag = "degenerate";
            } else {
                std::sort(picked.begin(), picked.end()); // chains follow sample order
                seeds.clear();
                seeds.reserve(picked.size());
                for (std::size_t i : picked) seeds.push_back(states[i]);
                for (auto& s : seeds)
                    if (s.u.empty()) s.u = to_standard_normal(space, s.x);
                prev_threshold = threshold;
            }
        }
    }

    result.estimate = combine_subsets(result.subsets);
    if (config.adaptive && !stop && !reached_final) flag = "max_subsets";
    if (!flag.empty()) {
        result.estimate.flag = flag;
        if (flag == "degenerate" || flag == "max_subsets") result.estimate.converged = false;
    }
    if (config.ess_corrected_cov && !ess_deltas.empty())
        result.estimate.cov_ess = cov_overall(ess_deltas);
    result.estimate.hf_calls = hf.call_count() - hf_calls_before;
    result.estimate.lf_calls = ledger.lf_calls;
    result.estimate.total_samples =
        static_cast<std::int64_t>(result.subsets.size()) * static_cast<std::int64_t>(n);
    result.estimate.simulated_time_s = ledger.simulated_time_s();
    if (surrogate.correction()) result.surrogate_json = surrogate.correction()->to_json_string();
    if (surrogate.lf_gp()) result.lf_surrogate_json = surrogate.lf_gp()->to_json_string();
    if (surrogate.lf_mlp()) result.lf_surrogate_json = surrogate.lf_mlp()->to_json_string();
    return result;
}

FailureEstimate compose_pf(const FailureEstimate& a, const FailureEstimate& b) {
    FailureEstimate out;
    out.p_f = a.p_f * b.p_f;
    out.cov = std::sqrt(a.cov * a.cov + b.cov * b.cov);
    out.beta = reliability_index(out.p_f);
    out.hf_calls = a.hf_calls + b.hf_calls;
    out.lf_calls = a.lf_calls + b.lf_calls;
    out.total_samples = a.total_samples + b.total_samples;
    out.converged = a.converged && b.converged;
    out.simulated_time_s = a.simulated_time_s + b.simulated_time_s;
    if (a.cov_ess || b.cov_ess) {
        const double ca = a.cov_ess.value_or(a.cov);
        const double cb = b.cov_ess.value_or(b.cov);
        out.cov_ess = std::sqrt(ca * ca + cb * cb);
    }
    return out;
}

BudgetSummary budget_report(const CallLedger& ledger, const ModelPair& pair) {
    BudgetSummary s;
    s.hf_calls = ledger.hf_calls;
    s.lf_calls = ledger.lf_calls;
    s.hf_seconds = static_cast<double>(ledger.hf_calls) *
                   (pair.hf ? pair.hf->cost_seconds() : ledger.hf_cost_seconds);
    s.lf_seconds = static_cast<double>(ledger.lf_calls) *
                   (pair.lf ? pair.lf->cost_seconds() : ledger.lf_cost_seconds);
    s.total_seconds = s.hf_seconds + s.lf_seconds;
    return s;
}

std::string budget_table(const std::vector<std::pair<std::string, BudgetSummary>>& entries) {
    std::ostringstream os;
    os << std::left << std::setw(22) << "strategy" << std::right << std::setw(10) << "HF calls"
       << std::setw(10) << "LF calls" << std::setw(14) << "HF time [s]" << std::setw(14)
       << "LF time [s]" << std::setw(14) << "total [s]" << '\n';
    for (const auto& [name, b] : entries) {
        os << std::left << std::setw(22) << name << std::right << std::setw(10) << b.hf_calls
           << std::setw(10) << b.lf_calls << std::setw(14) << std::fixed
           << std::setprecision(1) << b.hf_seconds << std::setw(14) << b.lf_seconds
           << std::setw(14) << b.total_seconds << '\n';
    }
    return os.str();
}

} // namespace relsim

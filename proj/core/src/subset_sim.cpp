#include "relsim/subset_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "relsim/normal.hpp"

namespace relsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

void SusConfig::validate() const {
    if (n_per_subset < 2) throw std::invalid_argument("sus.n_per_subset: must be >= 2");
    if (!(p0 > 0.0 && p0 < 1.0)) throw std::invalid_argument("sus.p0: must be in (0,1)");
    if (!adaptive && n_subsets < 1)
        throw std::invalid_argument("sus.n_subsets: must be >= 1 in fixed-count mode");
    if (max_subsets < 1) throw std::invalid_argument("sus.max_subsets: must be >= 1");
    if (!(proposal_width >= 0.0))
        throw std::invalid_argument("sus.proposal_width: must be >= 0");
    if (std::ceil(p0 * n_per_subset) < 1.0)
        throw std::invalid_argument("sus.p0: p0 * n_per_subset must be >= 1");
}

std::vector<std::string> SusConfig::warnings() const {
    std::vector<std::string> w;
    const double exact = p0 * n_per_subset;
    if (std::abs(exact - std::round(exact)) > 1e-9)
        w.push_back("sus: p0 * n_per_subset = " + std::to_string(exact) +
                    " is not an integer; seed count rounds up to " +
                    std::to_string(static_cast<long long>(std::ceil(exact))));
    return w;
}

double quantile_interpolated(std::span<const double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile: values must be non-empty");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must be in [0,1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto k = static_cast<std::size_t>(h);
    if (k + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(k);
    return sorted[k] + frac * (sorted[k + 1] - sorted[k]);
}

double select_threshold(std::span<const double> outputs, double p0) {
    return std::min(quantile_interpolated(outputs, 1.0 - p0), 0.0);
}

RunningQuantile::RunningQuantile(double q) : q_(q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("RunningQuantile: q must be in (0,1)");
}

void RunningQuantile::push(double v) {
    if (lower_.empty() || v <= *lower_.rbegin())
        lower_.insert(v);
    else
        upper_.insert(v);
    rebalance();
}

void RunningQuantile::rebalance() {
    const std::size_t n = count();
    const auto target = static_cast<std::size_t>(q_ * static_cast<double>(n - 1)) + 1;
    while (lower_.size() > target) {
        auto it = std::prev(lower_.end());
        upper_.insert(*it);
        lower_.erase(it);
    }
    while (lower_.size() < target) {
        auto it = upper_.begin();
        lower_.insert(*it);
        upper_.erase(it);
    }
}

double RunningQuantile::value() const {
    const std::size_t n = count();
    if (n == 0) throw std::logic_error("RunningQuantile: no values");
    const double h = q_ * static_cast<double>(n - 1);
    const double frac = h - std::floor(h);
    const double xk = *lower_.rbegin();
    if (frac == 0.0 || upper_.empty()) return xk;
    return xk + frac * (*upper_.begin() - xk);
}

std::vector<double> mh_step_u(const std::vector<double>& u, UniformStream& rng,
                              double proposal_width) {
    std::vector<double> out(u.size());
    for (std::size_t d = 0; d < u.size(); ++d) {
        const double xi = std_normal_quantile(rng.next());
        const double cand = u[d] + proposal_width * xi;
        const double log_ratio = 0.5 * (u[d] * u[d] - cand * cand);
        const double a = rng.next();
        out[d] = (std::log(a) < log_ratio) ? cand : u[d];
    }
    return out;
}

InputSample mh_step(const ParameterSpace& space, const InputSample& current,
                    UniformStream& rng, double proposal_width) {
    const std::vector<double> u = to_standard_normal(space, current);
    const std::vector<double> cand = mh_step_u(u, rng, proposal_width);
    if (cand == u) return current;
    return from_standard_normal(space, cand);
}

double cov_subset(double p, std::int64_t n) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("cov_subset: p must be in [0,1]");
    if (n < 1) throw std::invalid_argument("cov_subset: n must be >= 1");
    if (p == 0.0) return kInf;
    return std::sqrt((1.0 - p) / (p * static_cast<double>(n)));
}

double cov_overall(std::span<const double> deltas) {
    double s = 0.0;
    for (double d : deltas) s += d * d;
    return std::sqrt(s);
}

FailureEstimate combine_subsets(const std::vector<SusSubsetSummary>& subsets) {
    FailureEstimate est;
    double p = 1.0;
    std::vector<double> deltas;
    deltas.reserve(subsets.size());
    bool degenerate = false;
    for (const auto& s : subsets) {
        p *= s.p_cond;
        deltas.push_back(s.cov);
        if (s.p_cond == 0.0) degenerate = true;
    }
    est.p_f = p;
    est.cov = degenerate ? kInf : cov_overall(deltas);
    est.beta = reliability_index(p);
    est.converged = !degenerate;
    if (degenerate) est.flag = "degenerate";
    return est;
}

std::vector<int> plan_chain_lengths(int n_seeds, int n_total) {
    if (n_seeds < 1 || n_total < n_seeds)
        throw std::invalid_argument("plan_chain_lengths: need 1 <= n_seeds <= n_total");
    std::vector<int> len(n_seeds, n_total / n_seeds);
    const int rem = n_total % n_seeds;
    for (int c = 0; c < rem; ++c) ++len[c];
    return len;
}

namespace {

struct ChainState {
    InputSample x;
    std::vector<double> u;
    double output = 0.0;
};

// per-subset sample buffer
struct SubsetBuffer {
    std::vector<ChainState> samples;
    std::vector<double> outputs;
    std::vector<std::vector<double>> chain_outputs; // for the ESS-corrected COV
};

// Au-Beck correlation factor gamma for one subset's chains of indicators.
double chain_correlation_gamma(const std::vector<std::vector<char>>& chains, double p,
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

SusResult run_sus(const ParameterSpace& space, Evaluator& evaluator, const SusConfig& config) {
    config.validate();
    const std::int64_t calls_before = evaluator.call_count();
    const int n = config.n_per_subset;
    const auto n_seed_target = static_cast<int>(std::ceil(config.p0 * n));
    const int subsets_cap = config.adaptive ? config.max_subsets : config.n_subsets;

    SusResult result;
    std::vector<ChainState> seeds;
    std::vector<double> ess_deltas;
    double prev_threshold = -kInf;
    bool stop = false;
    bool reached_final = false;
    std::string flag;

    for (int si = 1; si <= subsets_cap && !stop; ++si) {
        SubsetBuffer buf;
        buf.samples.reserve(n);
        buf.outputs.reserve(n);
        const bool declared_final = !config.adaptive && si == config.n_subsets;

        if (si == 1) {
            RandomStream rng(derive_seed(config.seed, 1, 0));
            for (int i = 0; i < n; ++i) {
                ChainState s;
                s.x = sample(space, rng);
                s.output = evaluator.evaluate(s.x);
                result.trace.push_back({si, i, s.output, false, true});
                buf.outputs.push_back(s.output);
                buf.samples.push_back(std::move(s));
            }
            if (config.ess_corrected_cov)
                buf.chain_outputs.push_back(buf.outputs); // one "chain": i.i.d. MC
        } else {
            const int n_chains = static_cast<int>(seeds.size());
            const std::vector<int> lengths = plan_chain_lengths(n_chains, n);
            std::vector<RandomStream> streams;
            streams.reserve(n_chains);
            for (int c = 0; c < n_chains; ++c)
                streams.emplace_back(derive_seed(config.seed, static_cast<std::uint64_t>(si),
                                                 1000 + static_cast<std::uint64_t>(c)));
            std::vector<ChainState> cur = seeds;
            buf.chain_outputs.assign(config.ess_corrected_cov ? n_chains : 0, {});
            std::int64_t idx = 0;
            // seeds are the first samples of the subset
            for (int c = 0; c < n_chains; ++c) {
                result.trace.push_back({si, idx++, cur[c].output, true, true});
                buf.outputs.push_back(cur[c].output);
                buf.samples.push_back(cur[c]);
                if (config.ess_corrected_cov) buf.chain_outputs[c].push_back(cur[c].output);
            }
            int max_steps = 0;
            for (int c = 0; c < n_chains; ++c) max_steps = std::max(max_steps, lengths[c] - 1);
            for (int step = 0; step < max_steps; ++step) {
                for (int c = 0; c < n_chains; ++c) {
                    if (step >= lengths[c] - 1) continue;
                    const std::vector<double> u_cand =
                        mh_step_u(cur[c].u, streams[c], config.proposal_width);
                    bool accepted = false;
                    if (u_cand != cur[c].u) {
                        InputSample x_cand = from_standard_normal(space, u_cand);
                        const double g = evaluator.evaluate(x_cand);
                        if (g > prev_threshold) {
                            cur[c] = {std::move(x_cand), u_cand, g};
                            accepted = true;
                        }
                    }
                    result.trace.push_back({si, idx++, cur[c].output, false, accepted});
                    buf.outputs.push_back(cur[c].output);
                    buf.samples.push_back(cur[c]);
                    if (config.ess_corrected_cov) buf.chain_outputs[c].push_back(cur[c].output);
                }
            }
        }

        // fix the subset threshold and conditional probability
        double threshold = select_threshold(buf.outputs, config.p0);
        const bool is_final = declared_final || threshold >= 0.0;
        if (is_final && !declared_final && !config.adaptive) flag = "threshold_capped_early";
        if (is_final) threshold = 0.0;

        std::int64_t exceed = 0;
        for (double g : buf.outputs)
            exceed += is_final ? (g >= 0.0 ? 1 : 0) : (g > threshold ? 1 : 0);
        const double p_cond = static_cast<double>(exceed) / static_cast<double>(n);

        const SusSubsetSummary summary{si, threshold, p_cond, cov_subset(p_cond, n), n,
                                       is_final};
        result.subsets.push_back(summary);

        if (config.ess_corrected_cov && p_cond > 0.0) {
            std::vector<std::vector<char>> ind(buf.chain_outputs.size());
            for (std::size_t c = 0; c < buf.chain_outputs.size(); ++c) {
                ind[c].reserve(buf.chain_outputs[c].size());
                for (double g : buf.chain_outputs[c])
                    ind[c].push_back(is_final ? (g >= 0.0) : (g > threshold));
            }
            const double gamma = si == 1 ? 0.0 : chain_correlation_gamma(ind, p_cond, n);
            ess_deltas.push_back(summary.cov * std::sqrt(1.0 + gamma));
        }

        if (p_cond == 0.0) {
            stop = true;
            flag = "degenerate";
        } else if (is_final) {
            stop = true;
            reached_final = true;
        } else {
            // seed the next subset with the highest outputs (ties by index)
            std::vector<std::size_t> order(buf.samples.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return buf.outputs[a] > buf.outputs[b];
            });
            std::vector<std::size_t> picked;
            for (std::size_t r = 0;
                 r < order.size() && static_cast<int>(picked.size()) < n_seed_target; ++r)
                if (buf.outputs[order[r]] > threshold) picked.push_back(order[r]);
            if (picked.empty()) {
                stop = true;
                flag = "degenerate";
            } else {
                std::sort(picked.begin(), picked.end()); // chains follow sample order
                seeds.clear();
                seeds.reserve(picked.size());
                for (std::size_t i : picked) seeds.push_back(buf.samples[i]);
                for (auto& s : seeds)
                    if (s.u.empty()) s.u = to_standard_normal(space, s.x);
                prev_threshold = threshold;
            }
        }
    }

    result.estimate = combine_subsets(result.subsets);
    if (config.adaptive && !stop && !reached_final) {
        flag = "max_subsets";
        result.estimate.converged = false;
    }
    if (!flag.empty()) {
        result.estimate.flag = flag;
        if (flag == "degenerate" || flag == "max_subsets") result.estimate.converged = false;
    }
    if (config.ess_corrected_cov && !ess_deltas.empty())
        result.estimate.cov_ess = cov_overall(ess_deltas);
    result.estimate.hf_calls = evaluator.call_count() - calls_before;
    result.estimate.total_samples =
        static_cast<std::int64_t>(result.subsets.size()) * static_cast<std::int64_t>(n);
    result.estimate.simulated_time_s =
        static_cast<double>(result.estimate.hf_calls) * evaluator.cost_seconds();
    return result;
}

} // namespace relsim

#include "relsim/akmcs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relsim/normal.hpp"

namespace relsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd to_vector(const InputSample& x) {
    return Eigen::Map<const Eigen::VectorXd>(x.values.data(),
                                             static_cast<Eigen::Index>(x.values.size()));
}
} // namespace

void AkmcsConfig::validate() const {
    if (n_initial_doe < 1) throw std::invalid_argument("akmcs.n_initial_doe: must be >= 1");
    if (pool_initial < 1) throw std::invalid_argument("akmcs.pool_initial: must be >= 1");
    if (pool_increment < 1) throw std::invalid_argument("akmcs.pool_increment: must be >= 1");
    if (!(u_threshold > 0.0)) throw std::invalid_argument("akmcs.u_threshold: must be > 0");
    if (!(target_cov > 0.0 && target_cov < 1.0))
        throw std::invalid_argument("akmcs.target_cov: must be in (0,1)");
    if (max_hf_calls < 1) throw std::invalid_argument("akmcs.max_hf_calls: must be >= 1");
}

double u_function(const GpPrediction& pred) {
    if (pred.sd < 0.0) throw std::invalid_argument("u_function: sd must be >= 0");
    if (pred.sd == 0.0) return pred.mean == 0.0 ? 0.0 : kInf;
    return std::abs(pred.mean) / pred.sd;
}

double estimate_pf_weighted(std::span<const PfRecord> records) {
    if (records.empty())
        throw std::invalid_argument("estimate_pf_weighted: records must be non-empty");
    double acc = 0.0;
    for (const PfRecord& r : records) {
        if (r.from_hf) {
            acc += r.indicator ? 1.0 : 0.0;
        } else {
            // probability that the true indicator is 1: the prediction
            // confidence Phi(U) on the failure side, the sign-error
            // probability Phi(-U) on the safe side
            acc += r.indicator ? std_normal_cdf(r.u) : std_normal_cdf(-r.u);
        }
    }
    return acc / static_cast<double>(records.size());
}

double cov_mcs(double p_f, std::int64_t n) {
    if (!(p_f >= 0.0 && p_f <= 1.0))
        throw std::invalid_argument("cov_mcs: p_f must be in [0,1]");
    if (n < 1) throw std::invalid_argument("cov_mcs: n must be >= 1");
    if (p_f == 0.0) return kInf;
    return std::sqrt((1.0 - p_f) / (p_f * static_cast<double>(n)));
}

AkmcsResult run_akmcs(const ParameterSpace& space, Evaluator& evaluator,
                      const AkmcsConfig& config) {
    config.validate();
    const std::int64_t calls_before = evaluator.call_count();

    // initial space-filling DoE, evaluated by the HF model
    RandomStream doe_rng(derive_seed(config.seed, 0xd0e));
    const auto doe = latin_hypercube(space, config.n_initial_doe, doe_rng);
    const Eigen::Index dim = static_cast<Eigen::Index>(space.dimension());
    Eigen::MatrixXd X(config.n_initial_doe, dim);
    Eigen::VectorXd y(config.n_initial_doe);
    for (int i = 0; i < config.n_initial_doe; ++i) {
        X.row(i) = to_vector(doe[i]).transpose();
        y[i] = evaluator.evaluate(doe[i]);
    }
    GpModel gp = GpModel::fit(X, y, config.gp);

    // candidate pool, grown (never redrawn) between convergence rounds
    RandomStream pool_rng(derive_seed(config.seed, 0x9001));
    struct PoolEntry {
        InputSample x;
        bool evaluated = false;
        bool indicator = false; // valid when evaluated
    };
    std::vector<PoolEntry> pool;
    auto grow_pool = [&](int count) {
        for (int i = 0; i < count; ++i) pool.push_back({sample(space, pool_rng), false, false});
    };
    grow_pool(config.pool_initial);

    AkmcsResult result;
    auto& est = result.estimate;
    int iteration = 0;
    constexpr int kMaxGrowthRounds = 1000;
    int growth_rounds = 0;

    std::vector<PfRecord> records;
    while (true) {
        ++iteration;
        // predict over the pool; already-evaluated entries keep their indicator
        records.clear();
        records.reserve(pool.size());
        double min_u = kInf;
        std::size_t argmin = pool.size();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (pool[i].evaluated) {
                records.push_back({true, pool[i].indicator, 0.0});
                continue;
            }
            const GpPrediction pred = gp.predict(to_vector(pool[i].x));
            const double u = u_function(pred);
            records.push_back({false, pred.mean >= 0.0, u});
            if (u < min_u) {
                min_u = u;
                argmin = i;
            }
        }
        const double p = estimate_pf_weighted(records);
        const double cov = p > 0.0 ? cov_mcs(p, static_cast<std::int64_t>(pool.size())) : kInf;
        const std::int64_t hf_calls = evaluator.call_count() - calls_before;
        result.trace.push_back({iteration, static_cast<int>(pool.size()), min_u, hf_calls, p, cov});

        auto finish = [&](bool converged, const char* flag) {
            est.p_f = p;
            est.cov = p == 0.0 ? kInf : cov;
            est.beta = reliability_index(p);
            est.hf_calls = hf_calls;
            est.total_samples = static_cast<std::int64_t>(pool.size());
            est.converged = converged;
            est.flag = flag;
        };

        if (min_u < config.u_threshold && argmin < pool.size()) {
            if (hf_calls >= config.max_hf_calls) {
                finish(false, "max_hf_calls");
                break;
            }
            PoolEntry& e = pool[argmin];
            const double g = evaluator.evaluate(e.x);
            e.evaluated = true;
            e.indicator = g >= 0.0;
            gp.add_point(to_vector(e.x), g, /*refit_hyperparams=*/true);
            continue;
        }

        // learning converged on this pool; check the estimator's precision
        if (cov <= config.target_cov) {
            finish(true, "");
            break;
        }
        if (p == 0.0) {
            finish(false, "degenerate");
            break;
        }
        if (++growth_rounds > kMaxGrowthRounds) {
            finish(false, "pool_growth_limit");
            break;
        }
        grow_pool(config.pool_increment);
    }

    est.simulated_time_s = static_cast<double>(est.hf_calls) * evaluator.cost_seconds();
    result.surrogate_json = gp.to_json_string();
    return result;
}

} // namespace relsim

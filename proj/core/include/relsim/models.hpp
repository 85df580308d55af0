#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "relsim/distributions.hpp"

namespace relsim {

// A limit-state evaluator: maps an input sample to a scalar performance value
// g, with failure <=> g >= 0. Carries nominal per-call cost metadata and a
// call counter that increments exactly once per evaluation (atomically, so
// independent DoE evaluations may run concurrently).
class Evaluator {
public:
    using Fn = std::function<double(const InputSample&)>;

    Evaluator(std::string name, Fn g, double cost_seconds = 0.0)
        : name_(std::move(name)), fn_(std::move(g)), cost_seconds_(cost_seconds) {}

    double evaluate(const InputSample& x) {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return fn_(x);
    }

    std::int64_t call_count() const { return calls_.load(std::memory_order_relaxed); }
    const std::string& name() const { return name_; }
    double cost_seconds() const { return cost_seconds_; }
    void set_cost_seconds(double s) { cost_seconds_ = s; }

private:
    std::string name_;
    Fn fn_;
    double cost_seconds_;
    std::atomic<std::int64_t> calls_{0};
};

// HF/LF evaluators sharing one parameter space (non-owning).
struct ModelPair {
    Evaluator* hf = nullptr;
    Evaluator* lf = nullptr;
};

// --- built-in benchmark problems ---------------------------------------

// 8-dimensional borehole input space {r_w, r, T_u, H_u, T_l, H_l, L, K_w}
// with the commonly used marginal set.
ParameterSpace borehole_space();

// Water-flow response F(X); throws EvaluationError on a non-positive radius
// ratio or a vanishing denominator.
double borehole_flow(const InputSample& x);

// g = F(X) - threshold (default 300, the standard rare-event setup).
std::unique_ptr<Evaluator> make_borehole(double threshold = 300.0,
                                         double cost_seconds = 0.0);

// Cheap distorted variant: log(r/r_w) scaled by (1+distortion) and the
// T_u/T_l term dropped. Correlated with the full model; stands in for a
// physics-based low-fidelity model.
double borehole_flow_lf(const InputSample& x, double distortion);
std::unique_ptr<Evaluator> make_borehole_lf(double distortion,
                                            double threshold = 300.0,
                                            double cost_seconds = 0.0);

// D i.i.d. standard-normal marginals named x1..xD.
ParameterSpace standard_normal_space(int dim);

// g = sum(x)/sqrt(D) - beta0; the failure probability is Phi(-beta0) exactly.
std::unique_ptr<Evaluator> make_linear(int dim, double beta0,
                                       double cost_seconds = 0.0);

// --- external models -----------------------------------------------------

// Wraps a line-oriented child process: each evaluation writes one
// whitespace-separated sample line to its stdin and reads one scalar line
// from its stdout. The process is spawned lazily on first use and kept alive
// for the evaluator's lifetime.
std::unique_ptr<Evaluator> make_subprocess(std::string command,
                                           double cost_seconds = 0.0);

} // namespace relsim

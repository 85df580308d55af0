#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace relsim {

// Anisotropic squared-exponential kernel hyperparameters: one length scale
// per input dimension plus an amplitude (output variance) and a diagonal
// nugget.
struct KernelParams {
    double amplitude = 1.0;
    Eigen::VectorXd length_scales;
    double nugget = 0.0;

    void validate(Eigen::Index dim) const;
};

struct GpPrediction {
    double mean = 0.0;
    double sd = 0.0;
};

struct GpFitOptions {
    // standardized units; doubled on factorization failure up to nugget_max
    double nugget = 1e-8;
    double nugget_max = 1e-4;
    bool standardize = true;
    int restarts = 3;
    // search bounds in log space (standardized units)
    double log_l_min = std::log(1e-2);
    double log_l_max = std::log(1e2);
    double log_amp_min = std::log(1e-4);
    double log_amp_max = std::log(1e4);
    // full-fit coordinate search
    double initial_step = 0.5;
    double min_step = 1e-3;
    int max_evals = 4000;
    // warm-started refit after each added point
    double warm_step = 0.12;
    double warm_min_step = 0.03;
    int warm_evals_per_dim = 4;
};

// k(x, x') = amplitude * exp(-1/2 sum_d (x_d - x'_d)^2 / l_d^2).
// Throws std::invalid_argument on dimension mismatch.
double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KernelParams& p);

// 1/2 ln|K + nugget I| + 1/2 y^T (K + nugget I)^{-1} y on the data as given
// (no standardization). Throws FactorizationError when not positive definite.
double gp_nll(const KernelParams& p, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Kriging model with internal input/output standardization (fixed at fit
// time) and a maintained Cholesky factor of the kernel matrix.
class GpModel {
public:
    // Hyperparameters found by log-space coordinate search on the marginal
    // likelihood objective, multi-start. Throws FittingError when no restart
    // can factorize even after the nugget ladder.
    static GpModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const GpFitOptions& opts = {});

    // Fixed hyperparameters, no optimization. By default no standardization,
    // so the posterior matches the textbook formulas on the raw data.
    static GpModel from_params(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               KernelParams params, bool standardize = false);

    GpPrediction predict(const Eigen::VectorXd& x) const;

    // Extends the training set by one pair and updates the factorization
    // incrementally; re-optimizes hyperparameters (warm-started from the
    // current values) when requested.
    void add_point(const Eigen::VectorXd& x, double y, bool refit_hyperparams);

    Eigen::Index size() const { return ys_.size(); }
    Eigen::Index dim() const { return x_mean_.size(); }

    // standardized units
    const KernelParams& params() const { return params_; }
    // objective value at the current hyperparameters (standardized data)
    double nll() const;

    const Eigen::MatrixXd& training_inputs() const { return x_raw_; }
    const Eigen::VectorXd& training_targets() const { return y_raw_; }
    const Eigen::VectorXd& input_mean() const { return x_mean_; }
    const Eigen::VectorXd& input_scale() const { return x_scale_; }
    double target_mean() const { return y_mean_; }
    double target_scale() const { return y_scale_; }
    const Eigen::MatrixXd& cholesky_factor() const { return chol_; }

    std::string to_json_string() const;
    static GpModel from_json_string(const std::string& text);

private:
    GpModel() = default;

    void set_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool standardize);
    void optimize(bool warm_start);
    bool refactor();                 // returns false when not positive definite
    void refactor_or_recover();      // nugget ladder, then FittingError
    Eigen::VectorXd kernel_vector(const Eigen::VectorXd& xs) const;
    Eigen::MatrixXd build_kernel_matrix(const KernelParams& p) const;

    Eigen::MatrixXd x_raw_;          // n x D
    Eigen::VectorXd y_raw_;
    Eigen::MatrixXd xs_;             // standardized inputs
    Eigen::VectorXd ys_;             // standardized targets
    Eigen::VectorXd x_mean_, x_scale_;
    double y_mean_ = 0.0, y_scale_ = 1.0;
    bool constant_target_ = false;
    KernelParams params_;
    Eigen::MatrixXd chol_;           // lower factor of K + nugget I
    Eigen::VectorXd alpha_;          // (K + nugget I)^{-1} ys
    GpFitOptions opts_;
};

} // namespace relsim

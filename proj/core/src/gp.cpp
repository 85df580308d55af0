#include "relsim/gp.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "relsim/errors.hpp"

namespace relsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

void KernelParams::validate(Eigen::Index dim) const {
    if (!(amplitude > 0.0)) throw std::invalid_argument("KernelParams: amplitude must be > 0");
    if (length_scales.size() != dim)
        throw std::invalid_argument("KernelParams: expected " + std::to_string(dim) +
                                    " length scales, got " +
                                    std::to_string(length_scales.size()));
    for (Eigen::Index d = 0; d < length_scales.size(); ++d)
        if (!(length_scales[d] > 0.0))
            throw std::invalid_argument("KernelParams: length scales must be > 0");
    if (!(nugget >= 0.0)) throw std::invalid_argument("KernelParams: nugget must be >= 0");
}

double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KernelParams& p) {
    if (x.size() != y.size() || x.size() != p.length_scales.size())
        throw std::invalid_argument("kernel: dimension mismatch");
    double s = 0.0;
    for (Eigen::Index d = 0; d < x.size(); ++d) {
        const double z = (x[d] - y[d]) / p.length_scales[d];
        s += z * z;
    }
    return p.amplitude * std::exp(-0.5 * s);
}

namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const KernelParams& p) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd scaled = X;
    for (Eigen::Index d = 0; d < X.cols(); ++d) scaled.col(d) /= p.length_scales[d];
    const Eigen::VectorXd sq = scaled.rowwise().squaredNorm();
    Eigen::MatrixXd K = scaled * scaled.transpose();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d2 = std::max(0.0, sq[i] + sq[j] - 2.0 * K(i, j));
            K(i, j) = p.amplitude * std::exp(-0.5 * d2);
        }
    K.diagonal().array() += p.nugget;
    return K;
}

// 1/2 ln|K| + 1/2 y' K^{-1} y given the assembled matrix; +inf when the
// factorization fails (used inside the hyperparameter search).
double nll_of_matrix(Eigen::MatrixXd K, const Eigen::VectorXd& y) {
    Eigen::LLT<Eigen::MatrixXd> llt(std::move(K));
    if (llt.info() != Eigen::Success) return kInf;
    const Eigen::MatrixXd& L = llt.matrixLLT();
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) log_det_half += std::log(L(i, i));
    const Eigen::VectorXd v = llt.matrixL().solve(y);
    return log_det_half + 0.5 * v.squaredNorm();
}

} // namespace

double gp_nll(const KernelParams& p, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    p.validate(X.cols());
    if (X.rows() != y.size()) throw std::invalid_argument("gp_nll: X rows must match y size");
    const double v = nll_of_matrix(kernel_matrix(X, p), y);
    if (v == kInf)
        throw FactorizationError("gp_nll: kernel matrix is not positive definite");
    return v;
}

// --- GpModel ---------------------------------------------------------------

void GpModel::set_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool standardize) {
    if (X.rows() < 1) throw std::invalid_argument("GpModel: need at least one training point");
    if (X.rows() != y.size()) throw std::invalid_argument("GpModel: X rows must match y size");
    x_raw_ = X;
    y_raw_ = y;
    const Eigen::Index n = X.rows(), dim = X.cols();
    if (standardize) {
        x_mean_ = X.colwise().mean();
        x_scale_.resize(dim);
        for (Eigen::Index d = 0; d < dim; ++d) {
            const double var = (X.col(d).array() - x_mean_[d]).square().sum() / n;
            x_scale_[d] = var > 0.0 ? std::sqrt(var) : 1.0;
        }
        y_mean_ = y.mean();
        const double y_var = (y.array() - y_mean_).square().sum() / n;
        y_scale_ = y_var > 0.0 ? std::sqrt(y_var) : 1.0;
    } else {
        x_mean_ = Eigen::VectorXd::Zero(dim);
        x_scale_ = Eigen::VectorXd::Ones(dim);
        y_mean_ = 0.0;
        y_scale_ = 1.0;
    }
    xs_ = (X.rowwise() - x_mean_.transpose()).array().rowwise() /
          x_scale_.transpose().array();
    ys_ = (y.array() - y_mean_) / y_scale_;
    constant_target_ = ys_.size() > 0 && (ys_.array() - ys_[0]).abs().maxCoeff() == 0.0;
}

Eigen::MatrixXd GpModel::build_kernel_matrix(const KernelParams& p) const {
    return kernel_matrix(xs_, p);
}

bool GpModel::refactor() {
    Eigen::LLT<Eigen::MatrixXd> llt(build_kernel_matrix(params_));
    if (llt.info() != Eigen::Success) return false;
    chol_ = llt.matrixLLT().triangularView<Eigen::Lower>();
    alpha_ = chol_.triangularView<Eigen::Lower>().solve(ys_);
    chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
    return true;
}

void GpModel::refactor_or_recover() {
    if (refactor()) return;
    // nugget ladder; a zero nugget stays zero so exact duplicates surface
    while (params_.nugget > 0.0 && params_.nugget < opts_.nugget_max) {
        params_.nugget = std::min(2.0 * params_.nugget, opts_.nugget_max);
        if (refactor()) return;
    }
    throw FittingError("GpModel: kernel matrix not positive definite (n=" +
                       std::to_string(ys_.size()) + ", nugget=" +
                       std::to_string(params_.nugget) + ")");
}

namespace {

struct SearchSpace {
    double lo_amp, hi_amp, lo_l, hi_l;
    double clamp(int coord, double v) const {
        if (coord == 0) return std::clamp(v, lo_amp, hi_amp);
        return std::clamp(v, lo_l, hi_l);
    }
};

// Cyclic coordinate pattern search in log space. Returns the best objective;
// theta is updated in place.
double coordinate_descent(std::vector<double>& theta, const SearchSpace& space,
                          double step, double min_step, int max_evals,
                          const std::function<double(const std::vector<double>&)>& f,
                          double f0) {
    double best = f0;
    int evals = 0;
    const int ncoord = static_cast<int>(theta.size());
    while (step >= min_step && evals < max_evals) {
        bool improved = false;
        for (int j = 0; j < ncoord && evals < max_evals; ++j) {
            for (double dir : {+1.0, -1.0}) {
                std::vector<double> trial = theta;
                trial[j] = space.clamp(j, theta[j] + dir * step);
                if (trial[j] == theta[j]) continue;
                const double v = f(trial);
                ++evals;
                if (v < best - 1e-12) {
                    best = v;
                    theta = trial;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

} // namespace

void GpModel::optimize(bool warm_start) {
    const Eigen::Index dim = xs_.cols();

    if (constant_target_) {
        // Degenerate case: all targets identical. The likelihood drives the
        // amplitude to the floor, so pin it at the nugget scale; the model
        // then predicts the constant with sd <= sqrt(nugget) everywhere.
        params_.amplitude = std::max(params_.nugget, 1e-12);
        if (params_.length_scales.size() != dim)
            params_.length_scales = Eigen::VectorXd::Ones(dim);
        refactor_or_recover();
        return;
    }

    const SearchSpace space{opts_.log_amp_min, opts_.log_amp_max, opts_.log_l_min,
                            opts_.log_l_max};
    auto objective = [this](const std::vector<double>& theta) {
        KernelParams p;
        p.amplitude = std::exp(theta[0]);
        p.nugget = params_.nugget;
        p.length_scales.resize(theta.size() - 1);
        for (std::size_t d = 1; d < theta.size(); ++d)
            p.length_scales[d - 1] = std::exp(theta[d]);
        return nll_of_matrix(build_kernel_matrix(p), ys_);
    };

    std::vector<std::vector<double>> starts;
    if (warm_start) {
        std::vector<double> t(dim + 1);
        t[0] = std::log(params_.amplitude);
        for (Eigen::Index d = 0; d < dim; ++d) t[d + 1] = std::log(params_.length_scales[d]);
        starts.push_back(std::move(t));
    } else {
        const double amp0 = 0.0; // targets are standardized to unit variance
        for (double l0 : {1.0, 0.3, 3.0}) {
            std::vector<double> t(dim + 1, std::log(l0));
            t[0] = amp0;
            starts.push_back(std::move(t));
        }
        starts.resize(std::max(1, std::min<int>(opts_.restarts, 3)));
    }
    for (auto& t : starts)
        for (std::size_t j = 0; j < t.size(); ++j) t[j] = space.clamp(j == 0 ? 0 : 1, t[j]);

    const double step = warm_start ? opts_.warm_step : opts_.initial_step;
    const double min_step = warm_start ? opts_.warm_min_step : opts_.min_step;
    const int max_evals = warm_start
                              ? opts_.warm_evals_per_dim * (static_cast<int>(dim) + 1)
                              : opts_.max_evals;

    double best = kInf;
    std::vector<double> best_theta;
    for (auto& t : starts) {
        double f0 = objective(t);
        if (f0 == kInf && !warm_start) continue;
        const double v = coordinate_descent(t, space, step, min_step, max_evals, objective, f0);
        if (v < best) {
            best = v;
            best_theta = t;
        }
    }
    if (best == kInf) {
        // every start failed to factorize; climb the nugget ladder and retry
        if (params_.nugget > 0.0 && params_.nugget < opts_.nugget_max) {
            params_.nugget = std::min(2.0 * params_.nugget, opts_.nugget_max);
            optimize(warm_start);
            return;
        }
        throw FittingError("GpModel::fit: no restart produced a positive definite kernel");
    }
    params_.amplitude = std::exp(best_theta[0]);
    params_.length_scales.resize(dim);
    for (Eigen::Index d = 0; d < dim; ++d)
        params_.length_scales[d] = std::exp(best_theta[d + 1]);
    refactor_or_recover();
}

GpModel GpModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const GpFitOptions& opts) {
    GpModel m;
    m.opts_ = opts;
    m.set_data(X, y, opts.standardize);
    m.params_.nugget = opts.nugget;
    m.params_.amplitude = 1.0;
    m.params_.length_scales = Eigen::VectorXd::Ones(X.cols());
    m.optimize(/*warm_start=*/false);
    return m;
}

GpModel GpModel::from_params(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             KernelParams params, bool standardize) {
    params.validate(X.cols());
    GpModel m;
    m.opts_ = GpFitOptions{};
    m.opts_.standardize = standardize;
    m.set_data(X, y, standardize);
    m.constant_target_ = false; // honor the given hyperparameters
    m.params_ = std::move(params);
    if (!m.refactor())
        throw FactorizationError("GpModel::from_params: kernel matrix not positive definite");
    return m;
}

Eigen::VectorXd GpModel::kernel_vector(const Eigen::VectorXd& xs) const {
    const Eigen::Index n = xs_.rows();
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index d = 0; d < xs_.cols(); ++d) {
            const double z = (xs_(i, d) - xs[d]) / params_.length_scales[d];
            s += z * z;
        }
        k[i] = params_.amplitude * std::exp(-0.5 * s);
    }
    return k;
}

GpPrediction GpModel::predict(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw std::invalid_argument("GpModel::predict: dimension mismatch");
    const Eigen::VectorXd xs = (x - x_mean_).cwiseQuotient(x_scale_);
    const Eigen::VectorXd k = kernel_vector(xs);
    const double mean_s = k.dot(alpha_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
    const double var_s = std::max(0.0, params_.amplitude - v.squaredNorm());
    return {y_mean_ + y_scale_ * mean_s, y_scale_ * std::sqrt(var_s)};
}

void GpModel::add_point(const Eigen::VectorXd& x, double y, bool refit_hyperparams) {
    if (x.size() != dim())
        throw std::invalid_argument("GpModel::add_point: dimension mismatch");
    const Eigen::Index n = ys_.size();

    x_raw_.conservativeResize(n + 1, Eigen::NoChange);
    x_raw_.row(n) = x.transpose();
    y_raw_.conservativeResize(n + 1);
    y_raw_[n] = y;

    const Eigen::VectorXd xs = (x - x_mean_).cwiseQuotient(x_scale_);
    const double ysn = (y - y_mean_) / y_scale_;
    xs_.conservativeResize(n + 1, Eigen::NoChange);
    xs_.row(n) = xs.transpose();
    ys_.conservativeResize(n + 1);
    ys_[n] = ysn;
    constant_target_ = constant_target_ && ysn == ys_[0];

    if (refit_hyperparams) {
        optimize(/*warm_start=*/true);
        return;
    }

    // incremental Cholesky append: L_{n+1} = [[L, 0], [w^T, d]]
    const Eigen::VectorXd k = kernel_vector(xs).head(n);
    const Eigen::VectorXd w = chol_.triangularView<Eigen::Lower>().solve(k);
    const double d2 = params_.amplitude + params_.nugget - w.squaredNorm();
    if (d2 > 0.0) {
        chol_.conservativeResize(n + 1, n + 1);
        chol_.row(n).head(n) = w.transpose();
        chol_.col(n).head(n).setZero();
        chol_(n, n) = std::sqrt(d2);
        alpha_ = chol_.triangularView<Eigen::Lower>().solve(ys_);
        chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
    } else {
        refactor_or_recover();
    }
}

double GpModel::nll() const {
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < chol_.rows(); ++i) log_det_half += std::log(chol_(i, i));
    return log_det_half + 0.5 * ys_.dot(alpha_);
}

std::string GpModel::to_json_string() const {
    nlohmann::json j;
    j["inputs"] = std::vector<std::vector<double>>();
    for (Eigen::Index i = 0; i < x_raw_.rows(); ++i) {
        std::vector<double> row(x_raw_.cols());
        for (Eigen::Index d = 0; d < x_raw_.cols(); ++d) row[d] = x_raw_(i, d);
        j["inputs"].push_back(row);
    }
    j["targets"] = std::vector<double>(y_raw_.data(), y_raw_.data() + y_raw_.size());
    j["amplitude"] = params_.amplitude;
    j["length_scales"] = std::vector<double>(params_.length_scales.data(),
                                             params_.length_scales.data() +
                                                 params_.length_scales.size());
    j["nugget"] = params_.nugget;
    j["x_mean"] = std::vector<double>(x_mean_.data(), x_mean_.data() + x_mean_.size());
    j["x_scale"] = std::vector<double>(x_scale_.data(), x_scale_.data() + x_scale_.size());
    j["y_mean"] = y_mean_;
    j["y_scale"] = y_scale_;
    return j.dump(2);
}

GpModel GpModel::from_json_string(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const auto inputs = j.at("inputs").get<std::vector<std::vector<double>>>();
    const auto targets = j.at("targets").get<std::vector<double>>();
    if (inputs.empty() || inputs.size() != targets.size())
        throw std::invalid_argument("GpModel::from_json_string: inconsistent training set");
    const Eigen::Index n = static_cast<Eigen::Index>(inputs.size());
    const Eigen::Index dim = static_cast<Eigen::Index>(inputs[0].size());
    Eigen::MatrixXd X(n, dim);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index d = 0; d < dim; ++d) X(i, d) = inputs[i][d];
        y[i] = targets[i];
    }
    GpModel m;
    m.set_data(X, y, /*standardize=*/false);
    const auto ls = j.at("length_scales").get<std::vector<double>>();
    m.params_.length_scales = Eigen::Map<const Eigen::VectorXd>(ls.data(), ls.size());
    m.params_.amplitude = j.at("amplitude").get<double>();
    m.params_.nugget = j.at("nugget").get<double>();
    const auto xm = j.at("x_mean").get<std::vector<double>>();
    const auto xsc = j.at("x_scale").get<std::vector<double>>();
    m.x_mean_ = Eigen::Map<const Eigen::VectorXd>(xm.data(), xm.size());
    m.x_scale_ = Eigen::Map<const Eigen::VectorXd>(xsc.data(), xsc.size());
    m.y_mean_ = j.at("y_mean").get<double>();
    m.y_scale_ = j.at("y_scale").get<double>();
    m.xs_ = (X.rowwise() - m.x_mean_.transpose()).array().rowwise() /
            m.x_scale_.transpose().array();
    m.ys_ = (y.array() - m.y_mean_) / m.y_scale_;
    m.constant_target_ = false;
    if (!m.refactor())
        throw FactorizationError("GpModel::from_json_string: matrix not positive definite");
    return m;
}

} // namespace relsim

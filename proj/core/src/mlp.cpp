#include "relsim/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "relsim/errors.hpp"
#include "relsim/random.hpp"

namespace relsim {

void MlpConfig::validate() const {
    if (hidden_layers < 1) throw std::invalid_argument("MlpConfig: hidden_layers must be >= 1");
    if (neurons_per_layer < 1)
        throw std::invalid_argument("MlpConfig: neurons_per_layer must be >= 1");
    if (!(l2_lambda >= 0.0)) throw std::invalid_argument("MlpConfig: l2_lambda must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("MlpConfig: learning_rate must be > 0");
    if (epochs < 1) throw std::invalid_argument("MlpConfig: epochs must be >= 1");
}

namespace {

// activations per layer for the whole batch; columns are samples
std::vector<Eigen::MatrixXd> forward_batch(const MlpModel& m, const Eigen::MatrixXd& Xs) {
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(m.weights.size() + 1);
    acts.push_back(Xs.transpose());
    for (std::size_t k = 0; k < m.weights.size(); ++k) {
        Eigen::MatrixXd z = (m.weights[k] * acts.back()).colwise() + m.biases[k];
        if (k + 1 < m.weights.size()) z = z.array().tanh();
        acts.push_back(std::move(z));
    }
    return acts;
}

double weight_norm_sq(const MlpModel& m) {
    double s = 0.0;
    for (const auto& w : m.weights) s += w.squaredNorm();
    return s;
}

} // namespace

double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& Xs, const Eigen::VectorXd& ys) {
    const auto acts = forward_batch(m, Xs);
    const Eigen::RowVectorXd pred = acts.back().row(0);
    const double mse = (pred.transpose() - ys).squaredNorm() / static_cast<double>(ys.size());
    return mse + m.config.l2_lambda * weight_norm_sq(m);
}

void mlp_gradients(const MlpModel& m, const Eigen::MatrixXd& Xs, const Eigen::VectorXd& ys,
                   std::vector<Eigen::MatrixXd>& grad_w,
                   std::vector<Eigen::VectorXd>& grad_b) {
    const std::size_t layers = m.weights.size();
    const auto acts = forward_batch(m, Xs);
    grad_w.resize(layers);
    grad_b.resize(layers);

    const double n = static_cast<double>(ys.size());
    // delta for the linear output layer
    Eigen::MatrixXd delta = (acts.back().row(0).transpose() - ys).transpose() * (2.0 / n);
    for (std::size_t k = layers; k-- > 0;) {
        grad_w[k] = delta * acts[k].transpose() + 2.0 * m.config.l2_lambda * m.weights[k];
        grad_b[k] = delta.rowwise().sum();
        if (k > 0) {
            delta = (m.weights[k].transpose() * delta).array() *
                    (1.0 - acts[k].array().square());
        }
    }
}

double MlpModel::predict(const Eigen::VectorXd& x) const {
    if (x.size() != x_mean.size())
        throw std::invalid_argument("MlpModel::predict: dimension mismatch");
    Eigen::VectorXd a = (x - x_mean).cwiseQuotient(x_scale);
    for (std::size_t k = 0; k < weights.size(); ++k) {
        a = weights[k] * a + biases[k];
        if (k + 1 < weights.size()) a = a.array().tanh();
    }
    return y_mean + y_scale * a[0];
}

MlpModel mlp_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const MlpConfig& config) {
    config.validate();
    if (X.rows() < 1) throw std::invalid_argument("mlp_train: need at least one sample");
    if (X.rows() != y.size()) throw std::invalid_argument("mlp_train: X rows must match y size");

    MlpModel m;
    m.config = config;
    const Eigen::Index n = X.rows(), dim = X.cols();
    m.x_mean = X.colwise().mean();
    m.x_scale.resize(dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
        const double var = (X.col(d).array() - m.x_mean[d]).square().sum() / n;
        m.x_scale[d] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    m.y_mean = y.mean();
    const double y_var = (y.array() - m.y_mean).square().sum() / n;
    m.y_scale = y_var > 0.0 ? std::sqrt(y_var) : 1.0;

    const Eigen::MatrixXd Xs = (X.rowwise() - m.x_mean.transpose()).array().rowwise() /
                               m.x_scale.transpose().array();
    const Eigen::VectorXd ys = (y.array() - m.y_mean) / m.y_scale;

    // scaled-uniform init, +-sqrt(6/(fan_in+fan_out)), biases zero
    RandomStream rng(derive_seed(config.seed, 0x6d6c70));
    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(dim));
    for (int k = 0; k < config.hidden_layers; ++k) sizes.push_back(config.neurons_per_layer);
    sizes.push_back(1);
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        const int fan_in = sizes[k], fan_out = sizes[k + 1];
        const double r = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = (2.0 * rng.next() - 1.0) * r;
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }

    std::vector<Eigen::MatrixXd> gw;
    std::vector<Eigen::VectorXd> gb;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double loss = mlp_loss(m, Xs, ys);
        if (!std::isfinite(loss))
            throw TrainingError("mlp_train: loss diverged at epoch " + std::to_string(epoch));
        mlp_gradients(m, Xs, ys, gw, gb);
        for (std::size_t k = 0; k < m.weights.size(); ++k) {
            m.weights[k] -= config.learning_rate * gw[k];
            m.biases[k] -= config.learning_rate * gb[k];
        }
    }
    m.final_loss = mlp_loss(m, Xs, ys);
    if (!std::isfinite(m.final_loss))
        throw TrainingError("mlp_train: loss diverged at epoch " + std::to_string(config.epochs));
    return m;
}

std::string MlpModel::to_json_string() const {
    nlohmann::json j;
    j["hidden_layers"] = config.hidden_layers;
    j["neurons_per_layer"] = config.neurons_per_layer;
    j["l2_lambda"] = config.l2_lambda;
    j["learning_rate"] = config.learning_rate;
    j["epochs"] = config.epochs;
    j["seed"] = config.seed;
    j["final_loss"] = final_loss;
    j["x_mean"] = std::vector<double>(x_mean.data(), x_mean.data() + x_mean.size());
    j["x_scale"] = std::vector<double>(x_scale.data(), x_scale.data() + x_scale.size());
    j["y_mean"] = y_mean;
    j["y_scale"] = y_scale;
    auto layers = nlohmann::json::array();
    for (std::size_t k = 0; k < weights.size(); ++k) {
        nlohmann::json layer;
        auto rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < weights[k].rows(); ++i) {
            std::vector<double> row(weights[k].cols());
            for (Eigen::Index c = 0; c < weights[k].cols(); ++c) row[c] = weights[k](i, c);
            rows.push_back(row);
        }
        layer["weights"] = rows;
        layer["biases"] =
            std::vector<double>(biases[k].data(), biases[k].data() + biases[k].size());
        layers.push_back(layer);
    }
    j["layers"] = layers;
    return j.dump(2);
}

} // namespace relsim

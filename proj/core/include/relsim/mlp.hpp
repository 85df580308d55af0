#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace relsim {

// Small fully connected regression network: tanh hidden layers, linear
// output, trained by full-batch gradient descent on MSE + L2 weight penalty.
struct MlpConfig {
    int hidden_layers = 3;
    int neurons_per_layer = 20;
    double l2_lambda = 1e-3;
    double learning_rate = 0.002;
    int epochs = 5000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct MlpModel {
    // weights[k] is (out x in) for layer k; biases[k] is (out)
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Eigen::VectorXd x_mean, x_scale;
    double y_mean = 0.0, y_scale = 1.0;
    double final_loss = 0.0;
    MlpConfig config;

    double predict(const Eigen::VectorXd& x) const;
    std::string to_json_string() const;
};

// Deterministic for a fixed seed; throws TrainingError (naming the epoch)
// when the loss stops being finite.
MlpModel mlp_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const MlpConfig& config);

// Loss and gradients on standardized data (rows of Xs are inputs). Exposed so
// the back-propagation can be checked against finite differences.
double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& Xs, const Eigen::VectorXd& ys);
void mlp_gradients(const MlpModel& m, const Eigen::MatrixXd& Xs, const Eigen::VectorXd& ys,
                   std::vector<Eigen::MatrixXd>& grad_w,
                   std::vector<Eigen::VectorXd>& grad_b);

} // namespace relsim

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "isacwave/rng.hpp"

namespace isacwave {

struct MlpParams {
    std::size_t hidden = 64;         // units in each of the two hidden layers
    double learning_rate = 1e-3;     // Adam step size
    std::size_t batch_size = 64;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;       // epochs without validation improvement
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;

    void validate() const;
};

/// inputs -> hidden -> hidden -> outputs, ReLU hidden units, sigmoid outputs.
/// The loss is binary cross-entropy averaged over all sample-label entries.
class Mlp {
public:
    struct Layer {
        Eigen::MatrixXd weight; // outputs x inputs
        Eigen::VectorXd bias;
    };

    Mlp() = default;
    Mlp(std::size_t inputs, std::size_t hidden, std::size_t outputs, Rng& rng);
    explicit Mlp(std::array<Layer, 3> layers);

    [[nodiscard]] Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const;
    [[nodiscard]] Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
    [[nodiscard]] double loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const;
    /// Returns the loss and writes d(loss)/d(parameters) in parameters() order.
    double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Eigen::VectorXd& grad) const;

    /// Flattened [W1, b1, W2, b2, W3, b3], column-major within each matrix.
    [[nodiscard]] Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& theta);
    [[nodiscard]] std::size_t parameter_count() const;

    [[nodiscard]] const std::array<Layer, 3>& layers() const noexcept { return layers_; }
    [[nodiscard]] std::size_t inputs() const noexcept;
    [[nodiscard]] std::size_t outputs() const noexcept;

private:
    std::array<Layer, 3> layers_;
};

struct MlpHistory {
    std::vector<double> train_loss;      // full training-set loss after each epoch
    std::vector<double> validation_loss;
    std::size_t best_epoch = 0;
};

/// Mini-batch Adam with early stopping on the validation loss; the returned
/// network holds the best-epoch parameters. An empty validation set falls
/// back to the training loss.
Mlp train_mlp(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& x_val,
              const Eigen::MatrixXd& y_val, const MlpParams& params, std::uint64_t seed,
              MlpHistory* history = nullptr);

} // namespace isacwave

#pragma once

#include <vector>

#include <Eigen/Dense>

namespace isacwave {

/// Per-feature z-scoring fitted on the training split. Features with zero
/// variance map to 0.
class Standardizer {
public:
    Standardizer() = default;
    Standardizer(std::vector<double> mean, std::vector<double> scale);

    static Standardizer fit(const Eigen::MatrixXd& features);

    [[nodiscard]] Eigen::MatrixXd transform(const Eigen::MatrixXd& features) const;
    [[nodiscard]] Eigen::RowVectorXd transform_row(const Eigen::RowVectorXd& row) const;

    [[nodiscard]] const std::vector<double>& mean() const noexcept { return mean_; }
    [[nodiscard]] const std::vector<double>& scale() const noexcept { return scale_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return mean_.size(); }

private:
    std::vector<double> mean_;
    std::vector<double> scale_; // 0 marks a constant feature
};

} // namespace isacwave

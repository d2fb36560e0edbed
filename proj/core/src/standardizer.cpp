#include "isacwave/standardizer.hpp"

#include <cmath>
#include <stdexcept>

namespace isacwave {

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> scale)
    : mean_(std::move(mean)), scale_(std::move(scale)) {
    if (mean_.size() != scale_.size()) {
        throw std::invalid_argument("Standardizer: mean and scale sizes differ");
    }
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
    if (x.rows() == 0) {
        throw std::invalid_argument("Standardizer::fit: no rows");
    }
    const auto d = static_cast<std::size_t>(x.cols());
    std::vector<double> mean(d);
    std::vector<double> scale(d);
    const double n = static_cast<double>(x.rows());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double mu = x.col(c).mean();
        const double var = (x.col(c).array() - mu).square().sum() / n;
        const double sd = std::sqrt(var);
        mean[static_cast<std::size_t>(c)] = mu;
        // Relative threshold so large-magnitude constant columns are still caught.
        scale[static_cast<std::size_t>(c)] = sd > 1e-12 * std::max(1.0, std::abs(mu)) ? sd : 0.0;
    }
    return Standardizer(std::move(mean), std::move(scale));
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.cols()) != mean_.size()) {
        throw std::invalid_argument("Standardizer: feature dimension mismatch");
    }
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const auto i = static_cast<std::size_t>(c);
        if (scale_[i] == 0.0) {
            out.col(c).setZero();
        } else {
            out.col(c) = (x.col(c).array() - mean_[i]) / scale_[i];
        }
    }
    return out;
}

Eigen::RowVectorXd Standardizer::transform_row(const Eigen::RowVectorXd& row) const {
    return transform(Eigen::MatrixXd(row)).row(0);
}

} // namespace isacwave

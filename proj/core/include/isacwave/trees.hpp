#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace isacwave {

/// Quantile binning of continuous features into at most max_bins buckets.
/// A value v of feature f falls in bin b = #{thresholds[f] < v}.
class BinMapper {
public:
    BinMapper() = default;
    explicit BinMapper(std::vector<std::vector<double>> thresholds);

    static BinMapper fit(const Eigen::MatrixXd& x, std::size_t max_bins);

    [[nodiscard]] std::uint8_t bin(std::size_t feature, double value) const;
    /// Row-major n x d bin codes.
    [[nodiscard]] std::vector<std::uint8_t> transform(const Eigen::MatrixXd& x) const;
    [[nodiscard]] std::size_t features() const noexcept { return thresholds_.size(); }
    [[nodiscard]] const std::vector<std::vector<double>>& thresholds() const noexcept { return thresholds_; }

private:
    std::vector<std::vector<double>> thresholds_;
};

/// Binary split on bin codes: rows with bin <= node.bin go left. Leaves have
/// feature == -1 and carry `value`.
struct TreeNode {
    std::int32_t feature = -1;
    std::int32_t bin = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
};
using Tree = std::vector<TreeNode>;

double tree_value(const Tree& tree, std::span<const std::uint8_t> row_bins);

struct ForestParams {
    std::size_t trees = 200;
    std::size_t max_depth = 12;
    std::size_t features_per_split = 3; // mtry
    std::size_t min_samples_split = 2;
    std::size_t max_bins = 64;

    void validate() const;
};

/// Binary-relevance random forest: one bagged Gini forest per label. Each
/// tree casts a hard 0/1 vote, so a score is the fraction of positive votes.
class RandomForest {
public:
    RandomForest() = default;
    RandomForest(BinMapper bins, std::vector<std::vector<Tree>> forests);

    static RandomForest fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const ForestParams& params,
                            std::uint64_t seed, std::size_t workers = 1);

    [[nodiscard]] Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
    [[nodiscard]] const BinMapper& bins() const noexcept { return bins_; }
    [[nodiscard]] const std::vector<std::vector<Tree>>& forests() const noexcept { return forests_; }

private:
    BinMapper bins_;
    std::vector<std::vector<Tree>> forests_; // [label][tree]
};

struct BoostingParams {
    std::size_t rounds = 200;
    std::size_t max_depth = 3;
    double learning_rate = 0.1;
    double l2 = 1.0;                  // lambda on leaf weights
    double min_child_hessian = 1e-3;
    std::size_t max_bins = 64;

    void validate() const;
};

/// Per-label training logistic loss after each round (index 0 = base score).
using BoostingHistory = std::vector<std::vector<double>>;

/// Binary-relevance gradient boosting with logistic loss and Newton leaf
/// weights. A round is kept only if it does not raise the training loss; a
/// rejected round is retried at half step and otherwise dropped.
class GradientBoosting {
public:
    GradientBoosting() = default;
    GradientBoosting(BinMapper bins, std::vector<double> base, std::vector<std::vector<Tree>> ensembles);

    static GradientBoosting fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const BoostingParams& params,
                                std::size_t workers = 1, BoostingHistory* history = nullptr);

    [[nodiscard]] Eigen::MatrixXd margins(const Eigen::MatrixXd& x) const;
    [[nodiscard]] Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
    [[nodiscard]] const BinMapper& bins() const noexcept { return bins_; }
    [[nodiscard]] const std::vector<double>& base() const noexcept { return base_; }
    [[nodiscard]] const std::vector<std::vector<Tree>>& ensembles() const noexcept { return ensembles_; }

private:
    BinMapper bins_;
    std::vector<double> base_;                 // per-label initial log-odds
    std::vector<std::vector<Tree>> ensembles_; // leaf values include the step size
};

} // namespace isacwave

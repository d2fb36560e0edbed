#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "isacwave/mlp.hpp"
#include "isacwave/scenario.hpp"
#include "isacwave/signal.hpp"
#include "isacwave/standardizer.hpp"
#include "isacwave/trees.hpp"

namespace isacwave {

enum class ModelKind : std::uint8_t { Mlp = 0, RandomForest = 1, GradientBoosting = 2 };

std::string_view to_string(ModelKind kind) noexcept;
std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept;

struct LearnConfig {
    MlpParams mlp;
    ForestParams forest;
    BoostingParams boosting;
    double threshold = 0.5;
    std::size_t workers = 1;

    void validate() const;
};

using LabelVector = std::array<std::uint8_t, kNumWaveforms>;
using ScoreVector = std::array<double, kNumWaveforms>;

/// Per-feature 10th/50th/90th percentiles of the raw training features.
struct FeatureQuantiles {
    FeatureVector p10{};
    FeatureVector p50{};
    FeatureVector p90{};
};

FeatureQuantiles feature_quantiles(const Eigen::MatrixXd& features);

struct TrainedModel {
    ModelKind kind = ModelKind::Mlp;
    std::uint64_t seed = 0;
    LearnConfig config;
    Standardizer standardizer;
    FeatureQuantiles quantiles;
    std::variant<Mlp, RandomForest, GradientBoosting> model;
};

/// Trains one multi-label model. Features are standardized on the training
/// rows for every kind. The validation rows drive MLP early stopping and are
/// ignored by the tree ensembles.
TrainedModel fit(ModelKind kind, const Eigen::MatrixXd& features, const Eigen::MatrixXd& labels,
                 const Eigen::MatrixXd& val_features, const Eigen::MatrixXd& val_labels,
                 const LearnConfig& config, std::uint64_t seed);

/// Row-wise confidences in [0, 1].
Eigen::MatrixXd predict_scores(const TrainedModel& model, const Eigen::MatrixXd& features);
ScoreVector predict_scores(const TrainedModel& model, const FeatureVector& features);

/// y_k = 1 iff score_k >= threshold; an all-zero result sets the argmax bit
/// (lowest index on ties).
LabelVector predict_set(const ScoreVector& scores, double threshold);

/// Index of the largest score, lowest index on ties.
std::size_t argmax(const ScoreVector& scores) noexcept;

/// Versioned JSON model file.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);

} // namespace isacwave

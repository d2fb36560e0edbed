#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "isacwave/dataset.hpp"
#include "isacwave/learn.hpp"

namespace isacwave {

struct ClassificationMetrics {
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    double exact_match = 0.0;
    double hamming_loss = 0.0;
};

/// Micro-F1 pools TP/FP/FN over all labels. A label with no true and no
/// predicted positives scores F1 = 1 in the macro average; with predictions
/// but no support it scores 0.
ClassificationMetrics classification_metrics(std::span<const LabelVector> truth, std::span<const LabelVector> predicted);

/// Fraction of rows whose highest score (lowest index on ties) is a true label.
double top1_inclusion(std::span<const ScoreVector> scores, std::span<const LabelVector> truth);

/// Scalar utility of one candidate: the component sum of its objective vector.
double utility(const ObjectiveVector& v) noexcept;

/// (J* - J_pick) / J* for one sample, 0 when J* <= 0.
double regret(const std::array<ObjectiveVector, kNumWaveforms>& objectives, std::size_t pick);

/// Mean regret of the given picks.
double utility_regret(std::span<const std::size_t> picks,
                      std::span<const std::array<ObjectiveVector, kNumWaveforms>> objectives);

/// Expected regret of picking a waveform uniformly at random, computed exactly.
double uniform_random_regret(std::span<const std::array<ObjectiveVector, kNumWaveforms>> objectives);

struct EvalReport {
    std::string model;
    std::string split;
    std::size_t samples = 0;
    ClassificationMetrics classification;
    double top1_inclusion = 0.0;
    double utility_regret = 0.0;
    double random_regret = 0.0; // uniform-random picker on the same rows
};

/// Thresholds `scores` into label sets and picks the argmax for regret.
EvalReport evaluate_scores(std::string model, std::string split, std::span<const LabeledSample> samples,
                           std::span<const std::size_t> rows, std::span<const ScoreVector> scores, double threshold);

/// Scores of a policy that reads the truth: members 0.75, the utility-best
/// member 1, everything else 0.
std::vector<ScoreVector> oracle_scores(std::span<const LabeledSample> samples, std::span<const std::size_t> rows);

/// Every row gets the per-waveform inclusion ratio of the reference rows.
std::vector<ScoreVector> prior_scores(std::span<const LabeledSample> samples, std::span<const std::size_t> reference,
                                      std::size_t count);

std::vector<ScoreVector> model_scores(const TrainedModel& model, std::span<const LabeledSample> samples,
                                      std::span<const std::size_t> rows);

std::string reports_to_json(std::span<const EvalReport> reports);
std::vector<EvalReport> reports_from_json(std::string_view text);
/// Aligned table: model, split, micro-F1, macro-F1, exact match, Hamming,
/// top-1 inclusion, regret.
std::string reports_to_table(std::span<const EvalReport> reports);

} // namespace isacwave

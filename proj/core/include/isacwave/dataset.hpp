#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isacwave/config.hpp"
#include "isacwave/learn.hpp"
#include "isacwave/objectives.hpp"
#include "isacwave/scenario.hpp"

namespace isacwave {

struct LabeledSample {
    std::uint64_t id = 0;
    std::uint64_t seed = 0;
    FeatureVector features{};
    std::array<ObjectiveVector, kNumWaveforms> objectives{};
    std::array<MetricRow, kNumWaveforms> metrics{}; // raw, unnormalized
    LabelVector labels{};
    std::size_t pareto_size = 0; // after epsilon filtering
    std::size_t strict_size = 0;

    [[nodiscard]] std::size_t popcount() const noexcept;
};

/// Labels from objective vectors: strict Pareto set, then epsilon filter.
LabelVector label_objectives(std::span<const ObjectiveVector> objectives, double epsilon,
                             std::size_t* strict_size = nullptr);

/// Simulates every waveform on one scenario and labels the result.
LabeledSample label_scenario(const Scenario& scenario, const Config& config);

/// Sample i is drawn with seed derive_seed(master_seed, i, Stream::Scenario).
/// The result is independent of `workers`.
std::vector<LabeledSample> generate_samples(const Config& config, std::size_t n, std::uint64_t master_seed,
                                            std::size_t workers);

struct DatasetSummary {
    double mean_pareto_size = 0.0;
    double median_pareto_size = 0.0;
    std::size_t min_pareto_size = 0;
    std::size_t max_pareto_size = 0;
    std::array<double, kNumWaveforms> inclusion{};
};

/// Fraction of samples whose label vector contains each waveform. Throws on
/// an empty dataset.
std::array<double, kNumWaveforms> inclusion_ratios(std::span<const LabeledSample> samples);
DatasetSummary summarize(std::span<const LabeledSample> samples);

/// Number of samples whose stored labels differ from relabelling their
/// stored objective vectors.
std::size_t audit_labels(std::span<const LabeledSample> samples, double epsilon);

using SplitSizes = std::array<std::size_t, 3>; // train, validation, test

/// Rounds the train and validation fractions; the test split takes the rest.
SplitSizes split_sizes(std::size_t n, const SplitFractions& fractions);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

/// Seeded shuffle partition; each part is sorted ascending. Throws
/// std::invalid_argument when the sizes do not sum to n.
SplitIndices split_indices(std::size_t n, const SplitSizes& sizes, std::uint64_t seed);

Eigen::MatrixXd feature_matrix(std::span<const LabeledSample> samples, std::span<const std::size_t> rows);
Eigen::MatrixXd label_matrix(std::span<const LabeledSample> samples, std::span<const std::size_t> rows);

struct DatasetManifest {
    std::size_t samples = 0;
    SplitSizes split{};
    std::uint64_t config_hash = 0;
    std::uint64_t master_seed = 0;
    std::array<std::string, kNumWaveforms> legend{};
    DatasetSummary summary;
};

inline constexpr std::string_view kDatasetFile = "dataset.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";

std::string sample_to_jsonl(const LabeledSample& sample);
LabeledSample sample_from_jsonl(std::string_view line);

/// Writes dataset.jsonl and manifest.json into `dir`.
void write_dataset(const std::filesystem::path& dir, std::span<const LabeledSample> samples,
                   const DatasetManifest& manifest);
/// Reads a JSONL file, or dataset.jsonl inside a directory.
std::vector<LabeledSample> read_dataset(const std::filesystem::path& path);

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

} // namespace isacwave

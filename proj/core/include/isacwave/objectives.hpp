#pragma once

#include <array>
#include <span>
#include <vector>

#include "isacwave/metrics.hpp"
#include "isacwave/scenario.hpp"

namespace isacwave {

/// Column order of a metric row.
enum class Metric : std::uint8_t {
    RangeResolution = 0,
    VelocityResolution = 1,
    PeakSidelobe = 2,
    ClutterIsl = 3,
    Ber = 4,
    SpectralEfficiency = 5,
    Throughput = 6,
    Papr = 7,
    Latency = 8,
    EnergyEfficiency = 9,
};

inline constexpr std::size_t kNumMetrics = 10;
using MetricRow = std::array<double, kNumMetrics>;

constexpr bool higher_is_better(Metric m) noexcept {
    return m == Metric::SpectralEfficiency || m == Metric::Throughput || m == Metric::EnergyEfficiency;
}

MetricRow to_row(const RawMetrics& raw);

/// Per-column min-max over the candidates, oriented so that 1 is best.
/// Lower-is-better columns map to (max - x) / (max - min); a column with no
/// spread maps to 0.5. Throws std::invalid_argument for fewer than 2 rows.
std::vector<MetricRow> normalize_across_candidates(std::span<const MetricRow> rows);

struct ObjectiveWeights {
    std::array<double, 4> alpha{0.25, 0.25, 0.25, 0.25}; // range, velocity, ASL, clutter
    std::array<double, 3> beta{1.0 / 3, 1.0 / 3, 1.0 / 3};  // BER, SE, throughput
    std::array<double, 3> gamma{1.0 / 3, 1.0 / 3, 1.0 / 3}; // PAPR, latency, efficiency

    /// Each group must be non-negative and sum to 1 within 1e-9.
    void validate() const;
};

struct ObjectiveScores {
    double j_s = 0.0;
    double j_c = 0.0;
    double j_j = 0.0;
};

using ObjectiveVector = std::array<double, 3>;

ObjectiveScores score(const MetricRow& normalized, const ObjectiveWeights& weights);

ObjectiveVector demand_weight(const ObjectiveScores& scores, const DemandMix& mix);

/// normalize -> score -> demand_weight for all candidates of one scenario.
std::vector<ObjectiveVector> objective_vectors(std::span<const MetricRow> rows, const ObjectiveWeights& weights,
                                               const DemandMix& mix);

} // namespace isacwave

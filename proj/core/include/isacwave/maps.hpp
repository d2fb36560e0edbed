#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "isacwave/learn.hpp"

namespace isacwave {

struct GridPoint {
    double rho_s = 0.0;
    double rho_c = 0.0;
};

/// Points (i/r, j/r) with i + j <= r, ordered by i then j.
std::vector<GridPoint> simplex_grid(std::size_t resolution);

/// Channel conditions held fixed while the demand mix sweeps the simplex.
struct RegimeSpec {
    std::string name;
    double snr_db = 0.0;
    double delay_spread_s = 0.0;
    double doppler_spread_hz = 0.0;
    double bandwidth_hz = 0.0;
    double mobility_mps = 0.0;
};

/// doppler-low, doppler-high, delay-low, delay-high, band-narrow, band-wide,
/// snr-low, snr-high.
const std::vector<std::string>& regime_names();

/// Every descriptor at its training median except the named one, which sits
/// at its 10th (low/narrow) or 90th (high/wide) percentile. Throws
/// std::invalid_argument for an unknown name.
RegimeSpec make_regime(const std::string& name, const FeatureQuantiles& quantiles);

/// Exactly two bits set: the two largest scores, lower index first on ties.
LabelVector top_two(const ScoreVector& scores);

struct SelectionMap {
    RegimeSpec regime;
    std::size_t resolution = 0;
    std::vector<GridPoint> grid;
    std::vector<ScoreVector> scores;
    std::vector<LabelVector> active;

    /// Grid points at which each waveform is active.
    [[nodiscard]] std::array<std::size_t, kNumWaveforms> active_counts() const;
};

FeatureVector regime_features(const RegimeSpec& regime, const GridPoint& point);

SelectionMap selection_map(const TrainedModel& model, const RegimeSpec& regime, std::size_t resolution);

/// Columns rho_s, rho_c, score_0..4, active_0..4; one row per grid point.
std::string map_to_csv(const SelectionMap& map);
/// Heatmap of one waveform's score over the triangle; inactive cells are faded.
std::string map_to_svg(const SelectionMap& map, WaveformId id);

/// Writes map_<regime>.csv and map_<regime>_<waveform>.svg; returns the paths.
std::vector<std::filesystem::path> render_map(const SelectionMap& map, const std::filesystem::path& dir);

} // namespace isacwave

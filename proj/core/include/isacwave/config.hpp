#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "isacwave/learn.hpp"
#include "isacwave/metrics.hpp"
#include "isacwave/objectives.hpp"
#include "isacwave/scenario.hpp"
#include "isacwave/waveform.hpp"

namespace isacwave {

struct SplitFractions {
    double train = 0.70;
    double validation = 0.15;
    double test = 0.15;
};

struct MapsConfig {
    std::size_t resolution = 50;
    std::vector<std::string> regimes{"doppler-low", "doppler-high", "delay-low", "delay-high",
                                     "band-narrow", "band-wide",    "snr-low",   "snr-high"};
};

/// Every tunable of the pipeline. The JSON form mirrors this nesting; see
/// config_to_json for the key names.
struct Config {
    std::uint64_t seed = 42;
    std::size_t samples = 20000;
    double epsilon = 0.02;
    std::size_t workers = 0; // 0 selects hardware concurrency; never affects results
    SplitFractions split;
    ScenarioConfig scenario;
    WaveformConfig waveform;
    MetricsConfig metrics;
    ObjectiveWeights objectives;
    LearnConfig learn;
    MapsConfig maps;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
    [[nodiscard]] std::size_t resolved_workers() const noexcept;
};

/// Parses a JSON document and merges it over the defaults. Unknown keys,
/// wrong types and invalid values raise ConfigError naming the field.
Config config_from_json(std::string_view text);
Config load_config(const std::filesystem::path& path);

/// Canonical pretty-printed JSON with every field present.
std::string config_to_json(const Config& config);

/// FNV-1a over the canonical JSON with `workers` excluded.
std::uint64_t config_hash(const Config& config);

} // namespace isacwave

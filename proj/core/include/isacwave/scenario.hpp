#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "isacwave/channel.hpp"
#include "isacwave/rng.hpp"

namespace isacwave {

/// Fractions of sensing-only, communication-only and joint users.
struct DemandMix {
    double rho_s = 1.0 / 3.0;
    double rho_c = 1.0 / 3.0;
    double rho_sc = 1.0 / 3.0;

    [[nodiscard]] bool valid(double tol = 1e-12) const noexcept;
    [[nodiscard]] std::array<double, 3> as_array() const noexcept { return {rho_s, rho_c, rho_sc}; }
};

enum class MobilityClass : std::uint8_t { Low = 0, Medium = 1, High = 2 };

/// One propagation path in physical units.
struct Path {
    cplx gain{1.0, 0.0};
    double delay_s = 0.0;
    double doppler_hz = 0.0;
};

struct PathSet {
    std::vector<Path> paths;
};

/// Cell-level channel summary: unweighted means of the per-user values.
struct CellDescriptors {
    double gamma = 1.0;    // mean SNR, linear
    double tau_d_s = 0.0;  // mean RMS delay spread
    double nu_d_hz = 0.0;  // mean RMS Doppler spread

    [[nodiscard]] double gamma_db() const noexcept;
};

struct UserState {
    PathSet channel;
    double snr_db = 0.0;
    double speed_mps = 0.0;
    std::array<double, 2> position_m{};
};

struct Range {
    double min = 0.0;
    double max = 0.0;
};

struct ScenarioConfig {
    Range snr_db{0.0, 30.0};
    double user_snr_spread_db = 3.0;         // per-user std-dev around the scenario mean
    Range delay_spread_s{50e-9, 2e-6};       // target RMS delay spread, sampled log-uniformly
    std::size_t min_paths = 2;
    std::size_t max_paths = 6;
    std::vector<Range> mobility_classes{{0.0, 3.0}, {3.0, 30.0}, {30.0, 120.0}};
    std::vector<double> bandwidths_hz{20e6, 50e6, 100e6, 200e6};
    std::size_t min_users = 10;
    std::size_t max_users = 50;
    double carrier_hz = 28e9;
    double cell_radius_m = 200.0;
    std::size_t min_echoes = 1;
    std::size_t max_echoes = 5;
    double echo_window_samples = 64.0;       // echo delays lie in [0, window / B)
    std::array<bool, 3> demand_enabled{true, true, true};

    void validate() const;
};

inline constexpr std::size_t kNumFeatures = 8;
using FeatureVector = std::array<double, kNumFeatures>;

/// Feature order of the dataset and model files.
enum class Feature : std::uint8_t {
    RhoS = 0,
    RhoC = 1,
    RhoSC = 2,
    GammaDb = 3,
    DelaySpreadS = 4,
    DopplerSpreadHz = 5,
    BandwidthHz = 6,
    MobilityMps = 7,
};

struct Scenario {
    std::uint64_t id = 0;
    std::uint64_t seed = 0;
    DemandMix mix;
    CellDescriptors cell;
    double bandwidth_hz = 20e6;
    double mobility_mps = 0.0;
    MobilityClass mobility_class = MobilityClass::Low;
    double carrier_hz = 28e9;
    std::vector<UserState> users;
    EchoSet echoes;

    [[nodiscard]] std::size_t user_count() const noexcept { return users.size(); }
};

struct ChannelDraw {
    std::vector<UserState> users;
    CellDescriptors cell;
    double bandwidth_hz = 0.0;
    double mobility_mps = 0.0;
    MobilityClass mobility_class = MobilityClass::Low;
};

/// Symmetric Dirichlet(1, 1, 1) restricted to the enabled components.
DemandMix sample_demand_mix(Rng& rng, const std::array<bool, 3>& enabled = {true, true, true});

ChannelDraw sample_channel(Rng& rng, const ScenarioConfig& config);

/// RMS delay spread and RMS Doppler spread of one path set, power-weighted.
struct SpreadStats {
    double mean_delay_s = 0.0;
    double rms_delay_s = 0.0;
    double mean_doppler_hz = 0.0;
    double rms_doppler_hz = 0.0;
};
SpreadStats path_spread(const PathSet& paths);

/// Cell descriptors from per-user path sets and linear SNRs. Throws
/// std::domain_error on an empty or zero-power path set.
CellDescriptors derive_descriptors(std::span<const PathSet> path_sets, std::span<const double> snr_linear);

Scenario sample_scenario(const ScenarioConfig& config, std::uint64_t seed, std::uint64_t id = 0);

FeatureVector build_feature_vector(const Scenario& scenario);

/// Channel of one user discretized at sample rate `bandwidth_hz`.
ChannelRealization to_realization(const PathSet& paths, double bandwidth_hz);

} // namespace isacwave

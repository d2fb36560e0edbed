#pragma once

#include <array>
#include <cstddef>

#include "isacwave/rng.hpp"
#include "isacwave/scenario.hpp"
#include "isacwave/waveform.hpp"

namespace isacwave {

using PerWaveform = std::array<double, kNumWaveforms>;

struct MetricsConfig {
    std::size_t comm_frames = 200;   // Monte-Carlo frames per (waveform, scenario)
    std::size_t sensing_frames = 8;  // autocorrelations averaged per sensing cut
    std::size_t papr_frames = 64;
    std::size_t oversampling = 8;    // correlation interpolation factor
    PerWaveform overhead{0.18, 0.18, 0.22, 0.05, 0.10};
    PerWaveform latency_factor{1.0, 1.2, 1.8, 0.8, 0.9};
    double tx_power_w = 1.0;
    double backoff_per_db = 0.1;     // amplifier backoff 1 + k * PAPR_dB

    void validate() const;
};

struct CommMetrics {
    double ber = 0.0;
    double spectral_efficiency = 0.0; // bits/s/Hz
    double throughput = 0.0;          // bits/s
};

struct SensingMetrics {
    double range_resolution_m = 0.0;
    double velocity_resolution_mps = 0.0;
    double asl_db = 0.0;              // peak sidelobe relative to the mainlobe
    double clutter_isl_db = 0.0;      // sidelobe-to-mainlobe energy ratio
};

struct JointMetrics {
    double papr_db = 0.0;
    double latency_s = 0.0;
    double energy_efficiency = 0.0;   // bits/J proxy
};

struct RawMetrics {
    CommMetrics comm;
    SensingMetrics sensing;
    JointMetrics joint;
};

/// Waveform numerology for a scenario: `base` with the sample rate set to B.
WaveformConfig numerology_for(const Scenario& scenario, const WaveformConfig& base);

/// Each user receives a contiguous burst of frames (frame f goes to user
/// f mod U) preceded by enough warm-up frames to fill the channel memory, so
/// inter-block interference and Doppler evolve as in a continuous stream.
CommMetrics measure_comm(WaveformId id, const Scenario& scenario, const WaveformConfig& base,
                         const MetricsConfig& config, Rng& rng);

/// Zero-Doppler autocorrelation over the unambiguous window, averaged over
/// frames. The mainlobe extends to the first null.
struct AutocorrelationCut {
    std::vector<double> lag_samples;  // non-negative lags, step 1/oversampling
    std::vector<double> magnitude;    // normalized to 1 at lag 0
};
AutocorrelationCut zero_doppler_cut(WaveformId id, const WaveformConfig& cfg, const MetricsConfig& config,
                                    Rng& rng);
/// Lag of the first local minimum of the cut, refined by a parabola fit.
double first_null_lag(const AutocorrelationCut& cut);

SensingMetrics measure_sensing(WaveformId id, const Scenario& scenario, const WaveformConfig& base,
                               const MetricsConfig& config);

JointMetrics measure_joint(WaveformId id, const Scenario& scenario, const WaveformConfig& base,
                           const MetricsConfig& config, double throughput);

/// All three measurements with the documented per-stream seeds.
RawMetrics measure_all(WaveformId id, const Scenario& scenario, const WaveformConfig& base,
                       const MetricsConfig& config);

} // namespace isacwave

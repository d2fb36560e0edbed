#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "isacwave/dsp.hpp"
#include "isacwave/rng.hpp"
#include "isacwave/signal.hpp"

namespace isacwave {

/// One propagation path in sample units.
struct TapPath {
    cplx gain{1.0, 0.0};
    double delay_samples = 0.0;
    double doppler_hz = 0.0;
};

/// Discrete delay-Doppler channel: y[n] = sum_l a_l e^{j2pi nu_l n/fs} s[n - d_l].
struct ChannelRealization {
    std::vector<TapPath> paths;
    double sample_rate_hz = 0.0;

    [[nodiscard]] double max_delay_samples() const noexcept;
    /// True when some path (including interpolator support) reaches past `cp_length`.
    [[nodiscard]] bool exceeds_cp(std::size_t cp_length) const noexcept;
};

/// A point reflector seen by the sensing receiver.
struct Echo {
    cplx coefficient{1.0, 0.0};
    double delay_s = 0.0;
    double doppler_hz = 0.0;
};

struct EchoSet {
    std::vector<Echo> echoes;
};

/// Interpolation filter realizing a delay of `delay_samples`: output sample n
/// takes sum_i taps[i] * s[n - first - i]. Integer delays use a single unit
/// tap; fractional delays use an 8-tap Hann-windowed sinc normalized to unit
/// DC gain.
struct FractionalDelay {
    std::ptrdiff_t first = 0;
    std::vector<double> taps;
};

inline constexpr std::size_t kInterpolatorTaps = 8;
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

FractionalDelay fractional_delay(double delay_samples);

/// Applies the multipath channel. Sample n of the frame is taken to occur at
/// absolute sample time `time_offset + n` for the Doppler phase. The output
/// has the input length; energy delayed past the end is truncated.
SignalFrame apply_channel(const SignalFrame& frame, const ChannelRealization& realization,
                          std::size_t time_offset = 0);

/// Per-sample complex noise variance giving `snr_db` relative to the frame's
/// mean power. Returns 0 for the noiseless sentinel.
double noise_variance_for(const SignalFrame& frame, double snr_db);

/// Adds circular white Gaussian noise at `snr_db` (relative to the frame's
/// mean power). `kNoiseless` returns the input unchanged.
SignalFrame add_noise(const SignalFrame& frame, double snr_db, Rng& rng);

/// Superposition of delayed, Doppler-shifted echoes of `frame`.
SignalFrame generate_echo(const SignalFrame& frame, const EchoSet& echoes);

/// Frequency response of the discrete channel on an `bins`-point grid, with
/// each path's Doppler phase frozen at absolute sample time `time_samples`.
CVec frequency_response(const ChannelRealization& realization, std::size_t bins,
                        double time_samples);

/// Matrix H with y = H s for one CP-protected block of `block` samples whose
/// first post-CP sample sits at absolute time `time_offset`. Delays wrap
/// circularly; inter-block interference is not represented.
Eigen::MatrixXcd block_channel_matrix(const ChannelRealization& realization, std::size_t block,
                                      std::size_t time_offset);

} // namespace isacwave

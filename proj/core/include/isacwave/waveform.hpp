#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "isacwave/channel.hpp"
#include "isacwave/signal.hpp"

namespace isacwave {

enum class PulseShape : std::uint8_t {
    Rectangular = 0,
    RootRaisedCosine = 1,
};

/// Numerology shared by the five waveforms. The sample rate equals the
/// occupied bandwidth B, so subcarrier spacing is B / subcarriers and the
/// symbol duration is subcarriers / B.
struct WaveformConfig {
    std::size_t subcarriers = 64;        // N: OFDM/OCDM/SC block size
    std::size_t cp_length = 16;          // samples
    std::size_t otfs_delay_bins = 8;     // M
    std::size_t otfs_doppler_bins = 8;   // N (OTFS)
    std::size_t fmcw_chirp_samples = 64; // B * T_chirp
    std::size_t fmcw_chirps_per_frame = 8;
    int modulation_order = 4;            // square QAM order
    PulseShape sc_pulse = PulseShape::Rectangular;
    double rrc_rolloff = 0.25;
    std::size_t rrc_span_symbols = 8;
    bool require_pow2 = true;
    double sample_rate_hz = 20e6;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;

    [[nodiscard]] double symbol_duration_s() const noexcept;
    [[nodiscard]] double subcarrier_spacing_hz() const noexcept;
    [[nodiscard]] double chirp_duration_s() const noexcept;
    /// Linear FM sweep rate B / T_chirp in Hz/s.
    [[nodiscard]] double chirp_rate_hz_per_s() const noexcept;
};

/// Largest OTFS grid accepted for block MMSE equalization.
inline constexpr std::size_t kMaxOtfsBins = 16;

std::size_t symbols_per_frame(WaveformId id, const WaveformConfig& cfg);
std::size_t frame_samples(WaveformId id, const WaveformConfig& cfg);
/// Information bits carried by one frame (FMCW: one per chirp).
std::size_t bits_per_frame(WaveformId id, const WaveformConfig& cfg);
/// Length of the unambiguous range window used for sensing cuts.
std::size_t sensing_window(WaveformId id, const WaveformConfig& cfg);

/// Gray-coded square QAM with unit average energy. Order 2 is BPSK.
int bits_per_symbol(int order);
CVec qam_map(std::span<const std::uint8_t> bits, int order);
std::vector<std::uint8_t> qam_demap(std::span<const cplx> symbols, int order);

/// Diagonal of the OCDM chirp matrix, e^{j*pi*n^2/N}.
CVec ocdm_chirp_diagonal(std::size_t n);
/// One unit-modulus chirp e^{j*pi*mu*t^2} sampled at the configured rate.
CVec fmcw_chirp(const WaveformConfig& cfg);

/// Builds one transmit frame. FMCW reads only the sign of each symbol's real
/// part (one bit per chirp); all other waveforms carry the symbols directly.
SignalFrame modulate(WaveformId id, std::span<const cplx> symbols, const WaveformConfig& cfg);

/// Genie knowledge handed to the receiver.
struct ChannelState {
    ChannelRealization realization;
    std::size_t start_sample = 0; // absolute time of the frame's first sample
    double noise_variance = 0.0;  // per complex sample
};

/// Equalized symbol estimates for one received frame. For FMCW the estimates
/// are matched-filter outputs normalized so a clean chirp gives +-1.
CVec demodulate(WaveformId id, const SignalFrame& rx, const WaveformConfig& cfg,
                const ChannelState& state);

/// Genie-aided demodulator bound to one channel realization. Per-path
/// responses are computed once; each frame only rotates them by the path
/// Doppler phases at its start time.
class Receiver {
public:
    Receiver(WaveformId id, const WaveformConfig& cfg, const ChannelRealization& realization,
             double noise_variance);

    [[nodiscard]] CVec demodulate(const SignalFrame& rx, std::size_t start_sample) const;

private:
    // Row-sparse single-path block matrix: row n has entries at columns
    // (n - first - i) mod len with value rotation[n] * taps[i].
    struct SparsePath {
        std::ptrdiff_t first = 0;
        std::vector<double> taps;
        CVec rotation;
    };

    [[nodiscard]] CVec path_phases(double time_samples) const;
    [[nodiscard]] CVec combined_response(double time_samples) const;
    [[nodiscard]] CVec demod_block(const SignalFrame& rx, std::size_t start_sample) const;
    [[nodiscard]] CVec demod_sc_rrc(const SignalFrame& rx, std::size_t start_sample) const;
    [[nodiscard]] CVec demod_otfs(const SignalFrame& rx, std::size_t start_sample) const;
    [[nodiscard]] CVec demod_fmcw(const SignalFrame& rx, std::size_t start_sample) const;

    WaveformId id_;
    WaveformConfig cfg_;
    ChannelRealization realization_;
    double noise_;
    std::vector<CVec> unit_responses_;        // per path, Doppler phase removed
    CVec pulse_spectrum_;                     // SC root-raised-cosine only
    std::vector<SparsePath> sparse_;          // OTFS only
    std::vector<CVec> chirp_echoes_;          // FMCW: reference chirp through each path
};

/// Peak-to-average power ratio, 10 log10(max|s|^2 / mean|s|^2).
double papr_db(const SignalFrame& frame);

} // namespace isacwave

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "isacwave/dsp.hpp"

namespace isacwave {

/// Candidate waveforms. The integer values are part of the dataset, model and
/// map file formats and must not be reordered.
enum class WaveformId : std::uint8_t {
    OFDM = 0,
    OCDM = 1,
    OTFS = 2,
    FMCW = 3,
    SC = 4,
};

inline constexpr std::size_t kNumWaveforms = 5;
inline constexpr std::array<WaveformId, kNumWaveforms> kAllWaveforms{
    WaveformId::OFDM, WaveformId::OCDM, WaveformId::OTFS, WaveformId::FMCW, WaveformId::SC};

constexpr std::size_t index_of(WaveformId id) noexcept { return static_cast<std::size_t>(id); }

std::string_view to_string(WaveformId id) noexcept;
std::optional<WaveformId> parse_waveform(std::string_view name) noexcept;

/// Complex baseband samples with their sampling rate.
struct SignalFrame {
    CVec samples;
    double sample_rate_hz = 0.0;
    WaveformId origin = WaveformId::OFDM;

    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
    [[nodiscard]] double duration_s() const noexcept {
        return sample_rate_hz > 0.0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
    }
};

} // namespace isacwave

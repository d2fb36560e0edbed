#include "isacwave/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "isacwave/errors.hpp"

namespace isacwave {

namespace {

constexpr std::array<std::string_view, kNumWaveforms> kNames{"OFDM", "OCDM", "OTFS", "FMCW", "SC"};

bool is_square_qam(int order) {
    if (order < 4) {
        return false;
    }
    int bits = 0;
    while ((1 << bits) < order) {
        ++bits;
    }
    return (1 << bits) == order && bits % 2 == 0;
}

std::size_t sc_samples_per_symbol(const WaveformConfig& cfg) {
    return cfg.sc_pulse == PulseShape::RootRaisedCosine ? 2 : 1;
}

void prepend_cp(CVec& block, std::size_t cp) {
    CVec out;
    out.reserve(block.size() + cp);
    const std::size_t n = block.size();
    for (std::size_t i = 0; i < cp; ++i) {
        out.push_back(block[(n - cp % n + i) % n]);
    }
    out.insert(out.end(), block.begin(), block.end());
    block = std::move(out);
}

// Root-raised-cosine impulse response at two samples per symbol, circularly
// wrapped onto `len` samples and scaled to unit energy.
CVec rrc_circular(std::size_t len, double beta, std::size_t span) {
    CVec g(len);
    const auto half = static_cast<std::ptrdiff_t>(span);  // span symbols * 2 sps / 2
    double e = 0.0;
    std::vector<std::pair<std::ptrdiff_t, double>> taps;
    for (std::ptrdiff_t i = -half; i <= half; ++i) {
        const double t = static_cast<double>(i) / 2.0;
        double v = 0.0;
        if (std::abs(t) < 1e-12) {
            v = 1.0 - beta + 4.0 * beta / kPi;
        } else if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
            v = beta / std::sqrt(2.0) *
                ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * beta)) + (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * beta)));
        } else {
            const double num = std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
            const double den = kPi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
            v = num / den;
        }
        taps.emplace_back(i, v);
        e += v * v;
    }
    const auto n = static_cast<std::ptrdiff_t>(len);
    for (const auto& [i, v] : taps) {
        g[static_cast<std::size_t>(((i % n) + n) % n)] += v / std::sqrt(e);
    }
    return g;
}

CVec unnormalized_fft(CVec x, bool inverse) {
    fft_inplace(x, inverse);
    return x;
}

double effective_noise(double noise_variance) { return std::max(noise_variance, 1e-12); }

cplx path_phase(const TapPath& p, double rate, double time_samples) {
    const double cycles = rate > 0.0 ? p.doppler_hz / rate : 0.0;
    return p.gain * std::polar(1.0, 2.0 * kPi * std::fmod(cycles * time_samples, 1.0));
}

} // namespace

std::string_view to_string(WaveformId id) noexcept { return kNames[index_of(id)]; }

std::optional<WaveformId> parse_waveform(std::string_view name) noexcept {
    for (auto id : kAllWaveforms) {
        if (kNames[index_of(id)] == name) {
            return id;
        }
    }
    return std::nullopt;
}

void WaveformConfig::validate() const {
    if (subcarriers == 0) {
        throw ConfigError("waveform.subcarriers must be positive");
    }
    if (require_pow2 && !is_pow2(subcarriers)) {
        throw ConfigError("waveform.subcarriers must be a power of two");
    }
    if (otfs_delay_bins == 0 || otfs_delay_bins > kMaxOtfsBins) {
        throw ConfigError("waveform.otfs_delay_bins must lie in [1, 16]");
    }
    if (otfs_doppler_bins == 0 || otfs_doppler_bins > kMaxOtfsBins) {
        throw ConfigError("waveform.otfs_doppler_bins must lie in [1, 16]");
    }
    if (require_pow2 && !is_pow2(otfs_doppler_bins)) {
        throw ConfigError("waveform.otfs_doppler_bins must be a power of two");
    }
    if (fmcw_chirp_samples == 0) {
        throw ConfigError("waveform.fmcw_chirp_samples must be positive");
    }
    if (fmcw_chirps_per_frame == 0) {
        throw ConfigError("waveform.fmcw_chirps_per_frame must be positive");
    }
    if (modulation_order != 2 && !is_square_qam(modulation_order)) {
        throw ConfigError("waveform.modulation_order must be 2 or a square QAM order");
    }
    if (!(rrc_rolloff > 0.0 && rrc_rolloff <= 1.0)) {
        throw ConfigError("waveform.rrc_rolloff must lie in (0, 1]");
    }
    if (!(sample_rate_hz > 0.0)) {
        throw ConfigError("waveform.sample_rate_hz must be positive");
    }
}

double WaveformConfig::symbol_duration_s() const noexcept {
    return static_cast<double>(subcarriers) / sample_rate_hz;
}

double WaveformConfig::subcarrier_spacing_hz() const noexcept {
    return sample_rate_hz / static_cast<double>(subcarriers);
}

double WaveformConfig::chirp_duration_s() const noexcept {
    return static_cast<double>(fmcw_chirp_samples) / sample_rate_hz;
}

double WaveformConfig::chirp_rate_hz_per_s() const noexcept {
    return sample_rate_hz / chirp_duration_s();
}

std::size_t symbols_per_frame(WaveformId id, const WaveformConfig& cfg) {
    switch (id) {
    case WaveformId::OTFS:
        return cfg.otfs_delay_bins * cfg.otfs_doppler_bins;
    case WaveformId::FMCW:
        return cfg.fmcw_chirps_per_frame;
    default:
        return cfg.subcarriers;
    }
}

std::size_t frame_samples(WaveformId id, const WaveformConfig& cfg) {
    switch (id) {
    case WaveformId::OTFS:
        return cfg.otfs_delay_bins * cfg.otfs_doppler_bins + cfg.cp_length;
    case WaveformId::FMCW:
        return cfg.fmcw_chirps_per_frame * cfg.fmcw_chirp_samples;
    case WaveformId::SC:
        return sc_samples_per_symbol(cfg) * cfg.subcarriers + cfg.cp_length;
    default:
        return cfg.subcarriers + cfg.cp_length;
    }
}

std::size_t bits_per_frame(WaveformId id, const WaveformConfig& cfg) {
    if (id == WaveformId::FMCW) {
        return cfg.fmcw_chirps_per_frame;
    }
    return symbols_per_frame(id, cfg) * static_cast<std::size_t>(bits_per_symbol(cfg.modulation_order));
}

std::size_t sensing_window(WaveformId id, const WaveformConfig& cfg) {
    switch (id) {
    case WaveformId::OTFS:
        return cfg.otfs_delay_bins * cfg.otfs_doppler_bins;
    case WaveformId::FMCW:
        return cfg.fmcw_chirp_samples;
    case WaveformId::SC:
        return sc_samples_per_symbol(cfg) * cfg.subcarriers;
    default:
        return cfg.subcarriers;
    }
}

int bits_per_symbol(int order) {
    int bits = 0;
    while ((1 << bits) < order) {
        ++bits;
    }
    return bits;
}

CVec qam_map(std::span<const std::uint8_t> bits, int order) {
    const int k = bits_per_symbol(order);
    if (k == 0 || bits.size() % static_cast<std::size_t>(k) != 0) {
        throw std::invalid_argument("qam_map: bit count is not a multiple of bits per symbol");
    }
    CVec out;
    out.reserve(bits.size() / static_cast<std::size_t>(k));
    if (order == 2) {
        for (auto b : bits) {
            out.emplace_back(b ? -1.0 : 1.0, 0.0);
        }
        return out;
    }
    const int per_axis = k / 2;
    const int levels = 1 << per_axis;
    const double scale = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
    auto axis = [&](std::size_t offset) {
        unsigned gray = 0;
        for (int i = 0; i < per_axis; ++i) {
            gray = (gray << 1U) | bits[offset + static_cast<std::size_t>(i)];
        }
        unsigned bin = gray;
        for (unsigned s = gray >> 1U; s != 0; s >>= 1U) {
            bin ^= s;
        }
        return (2.0 * bin - (levels - 1)) * scale;
    };
    for (std::size_t i = 0; i < bits.size(); i += static_cast<std::size_t>(k)) {
        out.emplace_back(axis(i), axis(i + static_cast<std::size_t>(per_axis)));
    }
    return out;
}

std::vector<std::uint8_t> qam_demap(std::span<const cplx> symbols, int order) {
    std::vector<std::uint8_t> bits;
    if (order == 2) {
        bits.reserve(symbols.size());
        for (const auto& s : symbols) {
            bits.push_back(s.real() < 0.0 ? 1 : 0);
        }
        return bits;
    }
    const int k = bits_per_symbol(order);
    const int per_axis = k / 2;
    const int levels = 1 << per_axis;
    const double scale = std::sqrt(2.0 * (order - 1) / 3.0);
    bits.reserve(symbols.size() * static_cast<std::size_t>(k));
    auto axis = [&](double v) {
        const double idx = std::round((v * scale + (levels - 1)) / 2.0);
        const auto bin = static_cast<unsigned>(std::clamp(idx, 0.0, static_cast<double>(levels - 1)));
        const unsigned gray = bin ^ (bin >> 1U);
        for (int i = per_axis - 1; i >= 0; --i) {
            bits.push_back(static_cast<std::uint8_t>((gray >> static_cast<unsigned>(i)) & 1U));
        }
    };
    for (const auto& s : symbols) {
        axis(s.real());
        axis(s.imag());
    }
    return bits;
}

CVec ocdm_chirp_diagonal(std::size_t n) {
    CVec c(n);
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        // n^2 mod 2N keeps the phase argument small for large indices.
        const double sq = static_cast<double>((i * i) % (2 * n));
        c[i] = std::polar(1.0, kPi * sq / nn);
    }
    return c;
}

CVec fmcw_chirp(const WaveformConfig& cfg) {
    CVec c(cfg.fmcw_chirp_samples);
    const double mu = cfg.chirp_rate_hz_per_s();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double t = static_cast<double>(i) / cfg.sample_rate_hz;
        c[i] = std::polar(1.0, kPi * mu * t * t);
    }
    return c;
}

SignalFrame modulate(WaveformId id, std::span<const cplx> symbols, const WaveformConfig& cfg) {
    if (symbols.size() != symbols_per_frame(id, cfg)) {
        throw std::invalid_argument("modulate: expected " + std::to_string(symbols_per_frame(id, cfg)) +
                                    " symbols for " + std::string(to_string(id)) + ", got " +
                                    std::to_string(symbols.size()));
    }
    const bool needs_pow2 = id == WaveformId::OFDM || id == WaveformId::OCDM ||
                            (id == WaveformId::SC && cfg.sc_pulse == PulseShape::RootRaisedCosine);
    if (cfg.require_pow2 && needs_pow2 && !is_pow2(cfg.subcarriers)) {
        throw std::invalid_argument("modulate: transform size must be a power of two");
    }

    SignalFrame frame;
    frame.sample_rate_hz = cfg.sample_rate_hz;
    frame.origin = id;
    switch (id) {
    case WaveformId::OFDM: {
        frame.samples = ifft_unitary(symbols);
        prepend_cp(frame.samples, cfg.cp_length);
        break;
    }
    case WaveformId::OCDM: {
        CVec f = fft_unitary(symbols);
        const CVec c = ocdm_chirp_diagonal(f.size());
        for (std::size_t k = 0; k < f.size(); ++k) {
            f[k] *= c[k];
        }
        frame.samples = ifft_unitary(f);
        prepend_cp(frame.samples, cfg.cp_length);
        break;
    }
    case WaveformId::OTFS: {
        // Delay-Doppler grid X[m][k] = symbols[m*N + k]. The inverse DFT along
        // Doppler gives the time-slot sequence of each delay bin, and slot t
        // of delay m is transmitted at sample t*M + m.
        const std::size_t m = cfg.otfs_delay_bins;
        const std::size_t nd = cfg.otfs_doppler_bins;
        frame.samples.assign(m * nd, cplx{});
        for (std::size_t d = 0; d < m; ++d) {
            const CVec slots = ifft_unitary(symbols.subspan(d * nd, nd));
            for (std::size_t t = 0; t < nd; ++t) {
                frame.samples[t * m + d] = slots[t];
            }
        }
        prepend_cp(frame.samples, cfg.cp_length);
        break;
    }
    case WaveformId::FMCW: {
        const CVec chirp = fmcw_chirp(cfg);
        frame.samples.reserve(symbols.size() * chirp.size());
        for (const auto& s : symbols) {
            const double sign = s.real() < 0.0 ? -1.0 : 1.0;
            for (const auto& c : chirp) {
                frame.samples.push_back(sign * c);
            }
        }
        break;
    }
    case WaveformId::SC: {
        if (cfg.sc_pulse == PulseShape::Rectangular) {
            frame.samples.assign(symbols.begin(), symbols.end());
        } else {
            const std::size_t len = 2 * cfg.subcarriers;
            CVec up(len);
            for (std::size_t i = 0; i < symbols.size(); ++i) {
                up[2 * i] = symbols[i];
            }
            CVec spec = unnormalized_fft(std::move(up), false);
            const CVec g = unnormalized_fft(rrc_circular(len, cfg.rrc_rolloff, cfg.rrc_span_symbols), false);
            for (std::size_t k = 0; k < len; ++k) {
                spec[k] *= g[k];
            }
            frame.samples = unnormalized_fft(std::move(spec), true);
            for (auto& v : frame.samples) {
                v /= static_cast<double>(len);
            }
        }
        prepend_cp(frame.samples, cfg.cp_length);
        break;
    }
    }
    return frame;
}

Receiver::Receiver(WaveformId id, const WaveformConfig& cfg, const ChannelRealization& realization,
                   double noise_variance)
    : id_(id), cfg_(cfg), realization_(realization), noise_(noise_variance) {
    if (realization_.paths.empty()) {
        throw std::invalid_argument("demodulate: missing channel state");
    }
    const double rate = realization_.sample_rate_hz;
    auto unit_path = [&](const TapPath& p) {
        ChannelRealization one;
        one.sample_rate_hz = rate;
        one.paths.push_back({cplx{1.0, 0.0}, p.delay_samples, 0.0});
        return one;
    };

    switch (id_) {
    case WaveformId::OFDM:
    case WaveformId::OCDM:
    case WaveformId::SC: {
        const std::size_t bins = id_ == WaveformId::SC ? sc_samples_per_symbol(cfg_) * cfg_.subcarriers
                                                      : cfg_.subcarriers;
        for (const auto& p : realization_.paths) {
            unit_responses_.push_back(frequency_response(unit_path(p), bins, 0.0));
        }
        if (id_ == WaveformId::SC && cfg_.sc_pulse == PulseShape::RootRaisedCosine) {
            pulse_spectrum_ = unnormalized_fft(rrc_circular(bins, cfg_.rrc_rolloff, cfg_.rrc_span_symbols), false);
        }
        break;
    }
    case WaveformId::OTFS: {
        const std::size_t len = cfg_.otfs_delay_bins * cfg_.otfs_doppler_bins;
        for (const auto& p : realization_.paths) {
            const FractionalDelay fd = fractional_delay(p.delay_samples);
            SparsePath sp{fd.first, fd.taps, CVec(len)};
            const double cycles = rate > 0.0 ? p.doppler_hz / rate : 0.0;
            for (std::size_t r = 0; r < len; ++r) {
                sp.rotation[r] = std::polar(1.0, 2.0 * kPi * std::fmod(cycles * static_cast<double>(r), 1.0));
            }
            sparse_.push_back(std::move(sp));
            unit_responses_.push_back(frequency_response(unit_path(p), len, 0.0));
        }
        break;
    }
    case WaveformId::FMCW: {
        const SignalFrame chirp{fmcw_chirp(cfg_), rate, WaveformId::FMCW};
        for (const auto& p : realization_.paths) {
            ChannelRealization one;
            one.sample_rate_hz = rate;
            one.paths.push_back({cplx{1.0, 0.0}, p.delay_samples, p.doppler_hz});
            chirp_echoes_.push_back(apply_channel(chirp, one).samples);
        }
        break;
    }
    }
}

CVec Receiver::path_phases(double time_samples) const {
    CVec c;
    c.reserve(realization_.paths.size());
    for (const auto& p : realization_.paths) {
        c.push_back(path_phase(p, realization_.sample_rate_hz, time_samples));
    }
    return c;
}

CVec Receiver::combined_response(double time_samples) const {
    const CVec c = path_phases(time_samples);
    CVec h(unit_responses_.front().size());
    for (std::size_t l = 0; l < c.size(); ++l) {
        for (std::size_t k = 0; k < h.size(); ++k) {
            h[k] += c[l] * unit_responses_[l][k];
        }
    }
    return h;
}

CVec Receiver::demodulate(const SignalFrame& rx, std::size_t start_sample) const {
    if (rx.size() < frame_samples(id_, cfg_)) {
        throw std::invalid_argument("demodulate: frame shorter than CP + block");
    }
    if (realization_.sample_rate_hz != rx.sample_rate_hz) {
        throw std::invalid_argument("demodulate: channel and frame sample rates differ");
    }
    switch (id_) {
    case WaveformId::OFDM:
    case WaveformId::OCDM:
        return demod_block(rx, start_sample);
    case WaveformId::SC:
        if (cfg_.sc_pulse == PulseShape::RootRaisedCosine) {
            return demod_sc_rrc(rx, start_sample);
        }
        return demod_block(rx, start_sample);
    case WaveformId::OTFS:
        return demod_otfs(rx, start_sample);
    case WaveformId::FMCW:
        return demod_fmcw(rx, start_sample);
    }
    throw std::invalid_argument("demodulate: unknown waveform");
}

// OFDM: zero-forcing per subcarrier. OCDM and SC: MMSE per frequency bin with
// the mean gain removed; OCDM additionally undoes the chirp phases.
CVec Receiver::demod_block(const SignalFrame& rx, std::size_t start_sample) const {
    const std::size_t n = cfg_.subcarriers;
    const std::size_t cp = cfg_.cp_length;
    const CVec y = fft_unitary(std::span<const cplx>(rx.samples.data() + cp, n));
    const CVec h = combined_response(static_cast<double>(start_sample + cp) + static_cast<double>(n) / 2.0);

    CVec z(n);
    if (id_ == WaveformId::OFDM) {
        for (std::size_t k = 0; k < n; ++k) {
            z[k] = y[k] * std::conj(h[k]) / std::max(std::norm(h[k]), 1e-30);
        }
        return z;
    }
    const double noise = effective_noise(noise_);
    double bias = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = std::norm(h[k]);
        z[k] = y[k] * std::conj(h[k]) / (p + noise);
        bias += p / (p + noise);
    }
    bias /= static_cast<double>(n);
    if (id_ == WaveformId::OCDM) {
        const CVec c = ocdm_chirp_diagonal(n);
        for (std::size_t k = 0; k < n; ++k) {
            z[k] *= std::conj(c[k]);
        }
    }
    CVec x = ifft_unitary(z);
    for (auto& v : x) {
        v /= bias;
    }
    return x;
}

// Joint channel-MMSE and matched pulse filter at two samples per symbol,
// sampled at the even instants.
CVec Receiver::demod_sc_rrc(const SignalFrame& rx, std::size_t start_sample) const {
    const std::size_t n = cfg_.subcarriers;
    const std::size_t len = 2 * n;
    const std::size_t cp = cfg_.cp_length;
    CVec y(rx.samples.begin() + static_cast<std::ptrdiff_t>(cp),
           rx.samples.begin() + static_cast<std::ptrdiff_t>(cp + len));
    y = unnormalized_fft(std::move(y), false);
    const CVec h = combined_response(static_cast<double>(start_sample + cp) + static_cast<double>(len) / 2.0);
    const CVec& g = pulse_spectrum_;
    const double noise = effective_noise(noise_);

    CVec z(len);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
        const double p = std::norm(h[k]);
        z[k] = y[k] * std::conj(g[k]) * std::conj(h[k]) / (p + noise);
        num += std::norm(g[k]) * p / (p + noise);
        den += std::norm(g[k]);
    }
    z = unnormalized_fft(std::move(z), true);
    const double bias = den > 0.0 ? num / den : 1.0;
    CVec x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = z[2 * i] / static_cast<double>(len) / bias;
    }
    return x;
}

// Block MMSE s = (H^H H + s2 I)^{-1} H^H r in the time domain, followed by the
// unitary OTFS demodulation transform; since the transform is unitary this is
// the delay-Doppler MMSE estimate. The system is solved by conjugate gradients
// preconditioned with the circulant (frozen-Doppler) approximation of H.
CVec Receiver::demod_otfs(const SignalFrame& rx, std::size_t start_sample) const {
    const std::size_t m = cfg_.otfs_delay_bins;
    const std::size_t nd = cfg_.otfs_doppler_bins;
    const std::size_t len = m * nd;
    const std::size_t cp = cfg_.cp_length;
    const auto n = static_cast<std::ptrdiff_t>(len);
    const double t0 = static_cast<double>(start_sample + cp);
    const CVec c = path_phases(t0);

    // Row-sparse H for this frame.
    std::size_t width = 0;
    for (const auto& sp : sparse_) {
        width += sp.taps.size();
    }
    std::vector<std::size_t> cols(len * width);
    CVec vals(len * width);
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        std::size_t e = static_cast<std::size_t>(r) * width;
        for (std::size_t l = 0; l < sparse_.size(); ++l) {
            const SparsePath& sp = sparse_[l];
            const cplx rowgain = c[l] * sp.rotation[static_cast<std::size_t>(r)];
            for (std::size_t i = 0; i < sp.taps.size(); ++i, ++e) {
                cols[e] = static_cast<std::size_t>((((r - sp.first - static_cast<std::ptrdiff_t>(i)) % n) + n) % n);
                vals[e] = rowgain * sp.taps[i];
            }
        }
    }
    const double noise = effective_noise(noise_);
    CVec tmp(len);
    auto normal_op = [&](const CVec& x, CVec& out) {
        for (std::size_t r = 0; r < len; ++r) {
            cplx acc{};
            for (std::size_t e = r * width; e < (r + 1) * width; ++e) {
                acc += vals[e] * x[cols[e]];
            }
            tmp[r] = acc;
        }
        for (std::size_t k = 0; k < len; ++k) {
            out[k] = noise * x[k];
        }
        for (std::size_t r = 0; r < len; ++r) {
            for (std::size_t e = r * width; e < (r + 1) * width; ++e) {
                out[cols[e]] += std::conj(vals[e]) * tmp[r];
            }
        }
    };

    CVec b(len);
    for (std::size_t r = 0; r < len; ++r) {
        const cplx y = rx.samples[cp + r];
        for (std::size_t e = r * width; e < (r + 1) * width; ++e) {
            b[cols[e]] += std::conj(vals[e]) * y;
        }
    }

    const CVec centre = path_phases(t0 + static_cast<double>(len) / 2.0);
    std::vector<double> precond(len);
    double bias = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
        cplx h{};
        for (std::size_t l = 0; l < centre.size(); ++l) {
            h += centre[l] * unit_responses_[l][k];
        }
        const double p = std::norm(h);
        precond[k] = 1.0 / (p + noise);
        bias += p / (p + noise);
    }
    bias /= static_cast<double>(len);
    auto apply_precond = [&](const CVec& v) {
        CVec f = fft_unitary(v);
        for (std::size_t k = 0; k < len; ++k) {
            f[k] *= precond[k];
        }
        return ifft_unitary(f);
    };
    auto dot = [](const CVec& u, const CVec& v) {
        cplx acc{};
        for (std::size_t i = 0; i < u.size(); ++i) {
            acc += std::conj(u[i]) * v[i];
        }
        return acc;
    };

    CVec s(len);
    CVec res = b;
    CVec z = apply_precond(res);
    CVec dir = z;
    CVec adir(len);
    cplx rz = dot(res, z);
    const double stop = 1e-14 * std::max(energy(b), 1e-300); // relative residual 1e-7
    for (std::size_t it = 0; it < 4 * len && energy(res) > stop; ++it) {
        normal_op(dir, adir);
        const cplx alpha = rz / dot(dir, adir);
        for (std::size_t i = 0; i < len; ++i) {
            s[i] += alpha * dir[i];
            res[i] -= alpha * adir[i];
        }
        z = apply_precond(res);
        const cplx rz_next = dot(res, z);
        const cplx beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < len; ++i) {
            dir[i] = z[i] + beta * dir[i];
        }
    }

    // QPSK decisions are scale-free; denser constellations are unbiased by
    // the mean per-bin MMSE gain of the circulant approximation.
    const double scale = cfg_.modulation_order > 4 ? bias : 1.0;
    CVec x(len);
    CVec row(nd);
    for (std::size_t d = 0; d < m; ++d) {
        for (std::size_t t = 0; t < nd; ++t) {
            row[t] = s[t * m + d];
        }
        const CVec dd = fft_unitary(row);
        for (std::size_t k = 0; k < nd; ++k) {
            x[d * nd + k] = dd[k] / scale;
        }
    }
    return x;
}

// Correlates each chirp slot against the chirp as received through the
// channel (its own leading edge only), normalized by the reference energy.
CVec Receiver::demod_fmcw(const SignalFrame& rx, std::size_t start_sample) const {
    const std::size_t lc = cfg_.fmcw_chirp_samples;
    CVec out(cfg_.fmcw_chirps_per_frame);
    CVec ref(lc);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const CVec c = path_phases(static_cast<double>(start_sample + k * lc));
        std::fill(ref.begin(), ref.end(), cplx{});
        for (std::size_t l = 0; l < c.size(); ++l) {
            for (std::size_t i = 0; i < lc; ++i) {
                ref[i] += c[l] * chirp_echoes_[l][i];
            }
        }
        const double e = energy(ref);
        if (!(e > 0.0)) {
            throw std::domain_error("demodulate: matched-filter reference has no energy");
        }
        cplx acc{};
        for (std::size_t i = 0; i < lc; ++i) {
            acc += std::conj(ref[i]) * rx.samples[k * lc + i];
        }
        out[k] = acc / e;
    }
    return out;
}

CVec demodulate(WaveformId id, const SignalFrame& rx, const WaveformConfig& cfg,
                const ChannelState& state) {
    return Receiver(id, cfg, state.realization, state.noise_variance).demodulate(rx, state.start_sample);
}

double papr_db(const SignalFrame& frame) {
    if (frame.samples.empty()) {
        throw std::invalid_argument("papr: empty frame");
    }
    double peak = 0.0;
    for (const auto& s : frame.samples) {
        peak = std::max(peak, std::norm(s));
    }
    const double mean = mean_power(frame.samples);
    if (!(mean > 0.0)) {
        throw std::domain_error("papr: zero-energy frame");
    }
    return std::max(0.0, 10.0 * std::log10(peak / mean));
}

} // namespace isacwave

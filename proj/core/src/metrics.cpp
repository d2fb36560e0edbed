#include "isacwave/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "isacwave/errors.hpp"

namespace isacwave {

namespace {

std::vector<std::uint8_t> random_bits(std::size_t n, Rng& rng) {
    std::vector<std::uint8_t> bits(n);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0) {
            word = rng();
        }
        bits[i] = static_cast<std::uint8_t>(word & 1U);
        word >>= 1U;
    }
    return bits;
}

int symbol_order(WaveformId id, const WaveformConfig& cfg) {
    return id == WaveformId::FMCW ? 2 : cfg.modulation_order;
}

SignalFrame random_frame(WaveformId id, const WaveformConfig& cfg, Rng& rng,
                         std::vector<std::uint8_t>* bits_out = nullptr) {
    const auto bits = random_bits(bits_per_frame(id, cfg), rng);
    const CVec symbols = qam_map(bits, symbol_order(id, cfg));
    if (bits_out != nullptr) {
        *bits_out = bits;
    }
    return modulate(id, symbols, cfg);
}

// Portion of a frame seen by the range processor: one chirp for FMCW, the
// CP-free block otherwise.
CVec sensing_segment(WaveformId id, const WaveformConfig& cfg, Rng& rng) {
    const SignalFrame frame = random_frame(id, cfg, rng);
    const std::size_t window = sensing_window(id, cfg);
    const std::size_t start = id == WaveformId::FMCW ? 0 : cfg.cp_length;
    CVec seg(frame.samples.begin() + static_cast<std::ptrdiff_t>(start),
             frame.samples.begin() + static_cast<std::ptrdiff_t>(start + window));
    if (!(energy(seg) > 0.0)) {
        throw std::domain_error("measure_sensing: degenerate all-zero frame");
    }
    return seg;
}

double to_db20(double ratio) {
    return ratio > 0.0 ? 20.0 * std::log10(ratio) : -300.0;
}

// Highest correlation magnitude of a Doppler-shifted echo against the
// reference outside the shifted mainlobe, relative to the zero-Doppler peak.
double doppler_cut_sidelobe(const CVec& seg, double doppler_hz, double rate, double null_lag,
                            std::size_t os) {
    const SignalFrame ref{seg, rate, WaveformId::OFDM};
    EchoSet target;
    target.echoes.push_back({cplx{1.0, 0.0}, 0.0, doppler_hz});
    const SignalFrame echo = generate_echo(ref, target);
    const std::vector<double> xc = interpolated_xcorr(echo.samples, seg, os);
    const double peak0 = energy(seg);
    const auto size = static_cast<std::ptrdiff_t>(xc.size());
    const auto window = static_cast<std::ptrdiff_t>(seg.size()) * static_cast<std::ptrdiff_t>(os);
    auto at = [&](std::ptrdiff_t lag) { return xc[static_cast<std::size_t>((lag + size) % size)]; };

    std::ptrdiff_t best = 0;
    for (std::ptrdiff_t lag = -window; lag <= window; ++lag) {
        if (at(lag) > at(best)) {
            best = lag;
        }
    }
    const double exclusion = null_lag * static_cast<double>(os);
    double side = 0.0;
    for (std::ptrdiff_t lag = -window; lag <= window; ++lag) {
        if (std::abs(static_cast<double>(lag - best)) >= exclusion) {
            side = std::max(side, at(lag));
        }
    }
    return side / peak0;
}

} // namespace

void MetricsConfig::validate() const {
    if (comm_frames == 0) {
        throw ConfigError("metrics.comm_frames must be positive");
    }
    if (sensing_frames == 0) {
        throw ConfigError("metrics.sensing_frames must be positive");
    }
    if (papr_frames == 0) {
        throw ConfigError("metrics.papr_frames must be positive");
    }
    if (oversampling == 0) {
        throw ConfigError("metrics.oversampling must be positive");
    }
    for (double o : overhead) {
        if (!(o >= 0.0 && o < 1.0)) {
            throw ConfigError("metrics.overhead entries must lie in [0, 1)");
        }
    }
    for (double f : latency_factor) {
        if (!(f > 0.0)) {
            throw ConfigError("metrics.latency_factor entries must be positive");
        }
    }
    if (!(tx_power_w > 0.0)) {
        throw ConfigError("metrics.tx_power_w must be positive");
    }
    if (!(backoff_per_db >= 0.0)) {
        throw ConfigError("metrics.backoff_per_db must be non-negative");
    }
}

WaveformConfig numerology_for(const Scenario& scenario, const WaveformConfig& base) {
    WaveformConfig cfg = base;
    cfg.sample_rate_hz = scenario.bandwidth_hz;
    return cfg;
}

CommMetrics measure_comm(WaveformId id, const Scenario& scenario, const WaveformConfig& base,
                         const MetricsConfig& config, Rng& rng) {
    if (scenario.users.empty()) {
        throw std::invalid_argument("measure_comm: scenario has no users");
    }
    const WaveformConfig cfg = numerology_for(scenario, base);
    const std::size_t frame_len = frame_samples(id, cfg);
    const std::size_t frame_bits = bits_per_frame(id, cfg);
    const int order = symbol_order(id, cfg);
    const std::size_t users = scenario.users.size();

    std::size_t errors = 0;
    std::size_t total = 0;
    for (std::size_t u = 0; u < users; ++u) {
        const std::size_t count = config.comm_frames / users + (u < config.comm_frames % users ? 1 : 0);
        if (count == 0) {
            continue;
        }
        const UserState& user = scenario.users[u];
        const ChannelRealization real = to_realization(user.channel, cfg.sample_rate_hz);
        const double memory = real.max_delay_samples();
        const std::size_t warm =
            memory > 0.0 ? static_cast<std::size_t>(std::ceil((memory + kInterpolatorTaps / 2.0) / static_cast<double>(frame_len)))
                         : 0;
        const std::size_t frames = warm + count;

        SignalFrame tx{CVec{}, cfg.sample_rate_hz, id};
        tx.samples.reserve(frames * frame_len);
        std::vector<std::vector<std::uint8_t>> sent(frames);
        for (std::size_t f = 0; f < frames; ++f) {
            const SignalFrame one = random_frame(id, cfg, rng, &sent[f]);
            tx.samples.insert(tx.samples.end(), one.samples.begin(), one.samples.end());
        }
        const SignalFrame faded = apply_channel(tx, real);
        const double noise = noise_variance_for(faded, user.snr_db);
        const SignalFrame rx = add_noise(faded, user.snr_db, rng);
        const Receiver receiver(id, cfg, real, noise);

        for (std::size_t f = warm; f < frames; ++f) {
            SignalFrame slot{CVec(rx.samples.begin() + static_cast<std::ptrdiff_t>(f * frame_len),
                                  rx.samples.begin() + static_cast<std::ptrdiff_t>((f + 1) * frame_len)),
                             cfg.sample_rate_hz, id};
            const CVec est = receiver.demodulate(slot, f * frame_len);
            const auto bits = qam_demap(est, order);
            for (std::size_t b = 0; b < frame_bits; ++b) {
                errors += bits[b] != sent[f][b] ? 1U : 0U;
            }
            total += frame_bits;
        }
    }

    CommMetrics m;
    const double n = static_cast<double>(total);
    m.ber = errors == 0 ? 1.0 / (2.0 * n) : std::min(0.5, static_cast<double>(errors) / n);
    m.spectral_efficiency = static_cast<double>(frame_bits) / static_cast<double>(frame_len);
    m.throughput = m.spectral_efficiency * cfg.sample_rate_hz * (1.0 - config.overhead[index_of(id)]);
    return m;
}

AutocorrelationCut zero_doppler_cut(WaveformId id, const WaveformConfig& cfg, const MetricsConfig& config,
                                    Rng& rng) {
    const std::size_t os = config.oversampling;
    const std::size_t window = sensing_window(id, cfg);
    const std::size_t points = window * os + 1;
    AutocorrelationCut cut;
    cut.magnitude.assign(points, 0.0);
    for (std::size_t f = 0; f < config.sensing_frames; ++f) {
        const CVec seg = sensing_segment(id, cfg, rng);
        const std::vector<double> xc = interpolated_xcorr(seg, seg, os);
        for (std::size_t m = 0; m < points; ++m) {
            cut.magnitude[m] += xc[m];
        }
    }
    const double peak = cut.magnitude[0];
    cut.lag_samples.resize(points);
    for (std::size_t m = 0; m < points; ++m) {
        cut.magnitude[m] /= peak;
        cut.lag_samples[m] = static_cast<double>(m) / static_cast<double>(os);
    }
    return cut;
}

double first_null_lag(const AutocorrelationCut& cut) {
    const auto& y = cut.magnitude;
    if (y.size() < 3) {
        throw std::invalid_argument("first_null_lag: cut too short");
    }
    const double step = cut.lag_samples[1] - cut.lag_samples[0];
    for (std::size_t m = 1; m + 1 < y.size(); ++m) {
        if (y[m] <= y[m - 1] && y[m] <= y[m + 1]) {
            const double denom = y[m - 1] - 2.0 * y[m] + y[m + 1];
            double offset = denom > 0.0 ? 0.5 * (y[m - 1] - y[m + 1]) / denom : 0.0;
            offset = std::clamp(offset, -0.5, 0.5);
            return cut.lag_samples[m] + offset * step;
        }
    }
    return cut.lag_samples.back();
}

SensingMetrics measure_sensing(WaveformId id, const Scenario& scenario, const WaveformConfig& base,
                               const MetricsConfig& config) {
    const WaveformConfig cfg = numerology_for(scenario, base);
    const std::uint64_t seed = derive_seed(scenario.seed, index_of(id), Stream::Sensing);
    Rng rng(seed);
    const AutocorrelationCut cut = zero_doppler_cut(id, cfg, config, rng);
    const double null_lag = first_null_lag(cut);
    const auto null_index = static_cast<std::size_t>(std::ceil(null_lag * static_cast<double>(config.oversampling)));

    double peak_side = 0.0;
    double side_energy = 0.0;
    double main_energy = 0.0;
    for (std::size_t m = 0; m < cut.magnitude.size(); ++m) {
        const double v = cut.magnitude[m];
        if (m >= null_index) {
            peak_side = std::max(peak_side, v);
            side_energy += v * v;
        } else {
            main_energy += v * v;
        }
    }

    double max_doppler = 0.0;
    for (const auto& e : scenario.echoes.echoes) {
        max_doppler = std::max(max_doppler, std::abs(e.doppler_hz));
    }
    if (max_doppler > 0.0) {
        Rng first(seed);
        const CVec seg = sensing_segment(id, cfg, first);
        peak_side = std::max(peak_side, doppler_cut_sidelobe(seg, max_doppler, cfg.sample_rate_hz, null_lag,
                                                             config.oversampling));
    }

    SensingMetrics s;
    s.range_resolution_m = kSpeedOfLight * null_lag / (2.0 * cfg.sample_rate_hz);
    const double frame_s = static_cast<double>(frame_samples(id, cfg)) / cfg.sample_rate_hz;
    s.velocity_resolution_mps = kSpeedOfLight / (2.0 * scenario.carrier_hz * frame_s);
    s.asl_db = std::min(0.0, to_db20(peak_side));
    s.clutter_isl_db = side_energy > 0.0 ? 10.0 * std::log10(side_energy / main_energy) : -300.0;
    return s;
}

JointMetrics measure_joint(WaveformId id, const Scenario& scenario, const WaveformConfig& base,
                           const MetricsConfig& config, double throughput) {
    const WaveformConfig cfg = numerology_for(scenario, base);
    Rng rng(derive_seed(scenario.seed, index_of(id), Stream::Joint));
    double papr = 0.0;
    for (std::size_t f = 0; f < config.papr_frames; ++f) {
        papr += papr_db(random_frame(id, cfg, rng));
    }
    JointMetrics j;
    j.papr_db = papr / static_cast<double>(config.papr_frames);
    const double frame_s = static_cast<double>(frame_samples(id, cfg)) / cfg.sample_rate_hz;
    j.latency_s = frame_s * config.latency_factor[index_of(id)];
    j.energy_efficiency = throughput / (config.tx_power_w * (1.0 + config.backoff_per_db * j.papr_db));
    return j;
}

RawMetrics measure_all(WaveformId id, const Scenario& scenario, const WaveformConfig& base,
                       const MetricsConfig& config) {
    Rng comm_rng(derive_seed(scenario.seed, index_of(id), Stream::Comm));
    RawMetrics m;
    m.comm = measure_comm(id, scenario, base, config, comm_rng);
    m.sensing = measure_sensing(id, scenario, base, config);
    m.joint = measure_joint(id, scenario, base, config, m.comm.throughput);
    return m;
}

} // namespace isacwave

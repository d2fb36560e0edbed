#include <cmath>

#include "doctest.h"
#include "isacwave/errors.hpp"
#include "isacwave/waveform.hpp"
#include "support.hpp"

using namespace isacwave;

namespace {

CVec payload(WaveformId id, const WaveformConfig& cfg, Rng& rng) {
    return testing::random_qpsk(symbols_per_frame(id, cfg), rng);
}

CVec strip_cp(const SignalFrame& f, std::size_t cp) { return {f.samples.begin() + static_cast<std::ptrdiff_t>(cp), f.samples.end()}; }

ChannelState flat() { return {{{{{1.0, 0.0}, 0.0, 0.0}}, 20e6}, 0, 0.0}; }

} // namespace

TEST_CASE("four-point OFDM symbol by hand") {
    WaveformConfig cfg;
    cfg.subcarriers = 4;
    cfg.cp_length = 1;
    const CVec x{{1.0, 0.0}, {}, {}, {}};
    const SignalFrame f = modulate(WaveformId::OFDM, x, cfg);
    REQUIRE(f.size() == 5);
    for (std::size_t n = 1; n < 5; ++n) {
        CHECK(std::abs(f.samples[n] - cplx{0.5, 0.0}) < 1e-15);
    }
    CHECK(f.samples[0] == f.samples[4]);
}

TEST_CASE("OFDM and OCDM are unitary") {
    const WaveformConfig cfg;
    Rng rng(1);
    for (const auto id : {WaveformId::OFDM, WaveformId::OCDM}) {
        for (int t = 0; t < 20; ++t) {
            const CVec x = testing::random_gaussian(cfg.subcarriers, rng);
            const CVec s = strip_cp(modulate(id, x, cfg), cfg.cp_length);
            CHECK(std::abs(energy(s) - energy(x)) <= 1e-9 * energy(x));
        }
    }
}

TEST_CASE("OCDM chirp diagonal") {
    const CVec c = ocdm_chirp_diagonal(8);
    for (std::size_t n = 0; n < 8; ++n) {
        CHECK(std::abs(c[n] - std::polar(1.0, kPi * static_cast<double>(n * n) / 8.0)) < 1e-12);
    }
}

TEST_CASE("frame geometry") {
    const WaveformConfig cfg;
    CHECK(frame_samples(WaveformId::OTFS, cfg) == cfg.otfs_delay_bins * cfg.otfs_doppler_bins + cfg.cp_length);
    CHECK(frame_samples(WaveformId::OFDM, cfg) == 80);
    CHECK(frame_samples(WaveformId::FMCW, cfg) == 512);
    CHECK(bits_per_frame(WaveformId::FMCW, cfg) == 8);
    CHECK(bits_per_frame(WaveformId::OFDM, cfg) == 128);
    Rng rng(2);
    for (const auto id : kAllWaveforms) {
        CHECK(modulate(id, payload(id, cfg, rng), cfg).size() == frame_samples(id, cfg));
    }
    CHECK_THROWS_AS(modulate(WaveformId::OFDM, CVec(3), cfg), std::invalid_argument);
}

TEST_CASE("constant-modulus waveforms have 0 dB PAPR") {
    WaveformConfig cfg;
    Rng rng(3);
    const SignalFrame fmcw = modulate(WaveformId::FMCW, payload(WaveformId::FMCW, cfg, rng), cfg);
    for (const auto& s : fmcw.samples) {
        CHECK(std::abs(std::abs(s) - 1.0) < 1e-12);
    }
    for (const auto& s : fmcw_chirp(cfg)) {
        CHECK(std::abs(std::abs(s) - 1.0) < 1e-12);
    }
    CHECK(std::abs(papr_db(fmcw)) < 1e-9);
    const SignalFrame sc = modulate(WaveformId::SC, payload(WaveformId::SC, cfg, rng), cfg);
    CHECK(std::abs(papr_db(sc)) < 1e-9);
}

TEST_CASE("OFDM PAPR exceeds single-carrier PAPR on average") {
    const WaveformConfig cfg;
    Rng rng(4);
    double ofdm = 0.0;
    double sc = 0.0;
    for (int f = 0; f < 1000; ++f) {
        ofdm += papr_db(modulate(WaveformId::OFDM, payload(WaveformId::OFDM, cfg, rng), cfg));
        sc += papr_db(modulate(WaveformId::SC, payload(WaveformId::SC, cfg, rng), cfg));
    }
    CHECK(ofdm / 1000.0 > sc / 1000.0);
    CHECK(ofdm / 1000.0 > 5.0);
}

TEST_CASE("QAM mapping round trips with unit energy") {
    Rng rng(5);
    for (const int order : {2, 4, 16, 64}) {
        const int bps = bits_per_symbol(order);
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(bps) * 4096);
        std::bernoulli_distribution b(0.5);
        for (auto& v : bits) {
            v = b(rng) ? 1 : 0;
        }
        const CVec s = qam_map(bits, order);
        CHECK(s.size() == 4096);
        CHECK(mean_power(s) == doctest::Approx(1.0).epsilon(0.05));
        CHECK(qam_demap(s, order) == bits);
    }
}

TEST_CASE("noiseless identity channel round trip for every waveform") {
    Rng rng(6);
    for (const auto pulse : {PulseShape::Rectangular, PulseShape::RootRaisedCosine}) {
        WaveformConfig cfg;
        cfg.sc_pulse = pulse;
        for (const auto id : kAllWaveforms) {
            CAPTURE(to_string(id));
            const CVec x = payload(id, cfg, rng);
            const CVec est = demodulate(id, modulate(id, x, cfg), cfg, flat());
            REQUIRE(est.size() == x.size());
            if (id == WaveformId::FMCW) {
                for (std::size_t i = 0; i < x.size(); ++i) {
                    CHECK(std::abs(est[i] - cplx{x[i].real() < 0 ? -1.0 : 1.0, 0.0}) < 1e-6);
                }
            } else if (id == WaveformId::SC && pulse == PulseShape::RootRaisedCosine) {
                // Span truncation leaves a little residual ISI; decisions stay exact.
                CHECK(testing::max_abs_diff(est, x) < 0.05);
                CHECK(qam_demap(est, 4) == qam_demap(x, 4));
            } else {
                CHECK(testing::max_abs_diff(est, x) < 1e-6);
            }
        }
    }
}

TEST_CASE("OFDM equalizes a two-tap channel inside the CP exactly") {
    const WaveformConfig cfg;
    Rng rng(7);
    const CVec x = payload(WaveformId::OFDM, cfg, rng);
    const ChannelRealization ch{{{{0.8, 0.3}, 0.0, 0.0}, {{-0.4, 0.25}, 3.0, 0.0}}, cfg.sample_rate_hz};
    const SignalFrame rx = apply_channel(modulate(WaveformId::OFDM, x, cfg), ch);
    const CVec est = demodulate(WaveformId::OFDM, rx, cfg, {ch, 0, 0.0});
    CHECK(testing::max_abs_diff(est, x) < 1e-6);
}

TEST_CASE("OTFS iterative receiver matches the dense MMSE solution") {
    const WaveformConfig cfg;
    Rng rng(8);
    const std::size_t m = cfg.otfs_delay_bins;
    const std::size_t nd = cfg.otfs_doppler_bins;
    const std::size_t len = m * nd;
    const ChannelRealization ch{
        {{{0.7, 0.2}, 0.0, 3.0e4}, {{0.3, -0.4}, 2.6, -5.5e4}, {{0.2, 0.1}, 6.0, 9.0e4}}, cfg.sample_rate_hz};
    const std::size_t start = 3 * frame_samples(WaveformId::OTFS, cfg);
    const double noise = 0.05;

    const CVec x = payload(WaveformId::OTFS, cfg, rng);
    const SignalFrame tx = modulate(WaveformId::OTFS, x, cfg);
    SignalFrame rx = apply_channel(tx, ch, start);
    const CVec n = testing::random_gaussian(rx.size(), rng);
    for (std::size_t i = 0; i < rx.size(); ++i) {
        rx.samples[i] += std::sqrt(noise / 2.0) * n[i];
    }

    const Eigen::MatrixXcd h = block_channel_matrix(ch, len, start + cfg.cp_length);
    Eigen::VectorXcd y(static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < len; ++i) {
        y(static_cast<Eigen::Index>(i)) = rx.samples[cfg.cp_length + i];
    }
    const Eigen::MatrixXcd a =
        h.adjoint() * h + noise * Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(len));
    const Eigen::VectorXcd s = a.ldlt().solve(h.adjoint() * y);
    CVec oracle(len);
    for (std::size_t d = 0; d < m; ++d) {
        CVec row(nd);
        for (std::size_t t = 0; t < nd; ++t) {
            row[t] = s(static_cast<Eigen::Index>(t * m + d));
        }
        const CVec dd = fft_unitary(row);
        for (std::size_t k = 0; k < nd; ++k) {
            oracle[d * nd + k] = dd[k];
        }
    }

    const CVec est = demodulate(WaveformId::OTFS, rx, cfg, {ch, start, noise});
    double err = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        err += std::norm(est[i] - oracle[i]);
    }
    CHECK(std::sqrt(err / energy(oracle)) < 1e-5);
}

TEST_CASE("FMCW decides a thousand chirps without error") {
    WaveformConfig cfg;
    cfg.fmcw_chirps_per_frame = 1000;
    Rng rng(9);
    const CVec x = payload(WaveformId::FMCW, cfg, rng);
    const CVec est = demodulate(WaveformId::FMCW, modulate(WaveformId::FMCW, x, cfg), cfg, flat());
    std::size_t errors = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        errors += (est[i].real() < 0) != (x[i].real() < 0) ? 1 : 0;
    }
    CHECK(errors == 0);
}

TEST_CASE("waveform config validation") {
    WaveformConfig cfg;
    cfg.subcarriers = 48;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.require_pow2 = false;
    CHECK_NOTHROW(cfg.validate());
    WaveformConfig q;
    q.modulation_order = 8;
    CHECK_THROWS_AS(q.validate(), ConfigError);
    CHECK(parse_waveform("OTFS") == WaveformId::OTFS);
    CHECK_FALSE(parse_waveform("LTE").has_value());
}

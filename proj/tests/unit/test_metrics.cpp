#include <cmath>

#include "doctest.h"
#include "isacwave/errors.hpp"
#include "isacwave/metrics.hpp"

using namespace isacwave;

namespace {

Scenario flat_scenario(double bandwidth_hz, double snr_db, std::uint64_t seed = 11) {
    Scenario s;
    s.seed = seed;
    s.bandwidth_hz = bandwidth_hz;
    UserState u;
    u.channel.paths = {{{1.0, 0.0}, 0.0, 0.0}};
    u.snr_db = snr_db;
    s.users = {u, u};
    return s;
}

Scenario faded_scenario(double snr_db) {
    Scenario s = flat_scenario(20e6, snr_db, 12);
    for (auto& u : s.users) {
        u.channel.paths = {{{0.8, 0.0}, 0.0, 200.0}, {{0.0, 0.6}, 1.5e-7, -150.0}};
    }
    return s;
}

MetricsConfig quick() {
    MetricsConfig m;
    m.comm_frames = 50;
    return m;
}

} // namespace

TEST_CASE("FMCW range resolution follows c / 2B") {
    const WaveformConfig base;
    for (const double b : {50e6, 100e6}) {
        const SensingMetrics s = measure_sensing(WaveformId::FMCW, flat_scenario(b, 20.0), base, MetricsConfig{});
        const double expected = kSpeedOfLight / (2.0 * b);
        CAPTURE(b);
        CHECK(std::abs(s.range_resolution_m - expected) <= 0.10 * expected);
    }
}

TEST_CASE("OFDM range resolution is within 15 percent of c / 2B") {
    const double b = 100e6;
    const SensingMetrics s = measure_sensing(WaveformId::OFDM, flat_scenario(b, 20.0), WaveformConfig{}, MetricsConfig{});
    const double expected = kSpeedOfLight / (2.0 * b);
    CHECK(std::abs(s.range_resolution_m - expected) <= 0.15 * expected);
}

TEST_CASE("velocity resolution is inverse to frame duration") {
    WaveformConfig base;
    const Scenario sc = flat_scenario(50e6, 20.0);
    const double v1 = measure_sensing(WaveformId::FMCW, sc, base, MetricsConfig{}).velocity_resolution_mps;
    base.fmcw_chirps_per_frame *= 2;
    const double v2 = measure_sensing(WaveformId::FMCW, sc, base, MetricsConfig{}).velocity_resolution_mps;
    CHECK(v2 == doctest::Approx(v1 / 2.0).epsilon(1e-14));
}

TEST_CASE("sensing metrics are well formed for every waveform") {
    Scenario sc = flat_scenario(20e6, 10.0);
    sc.carrier_hz = 28e9;
    sc.echoes.echoes = {{{1.0, 0.0}, 1e-7, 400.0}};
    for (const auto id : kAllWaveforms) {
        CAPTURE(to_string(id));
        const SensingMetrics s = measure_sensing(id, sc, WaveformConfig{}, MetricsConfig{});
        CHECK(s.range_resolution_m > 0.0);
        CHECK(s.velocity_resolution_mps > 0.0);
        CHECK(s.asl_db <= 0.0);
        CHECK(std::isfinite(s.clutter_isl_db));
    }
}

TEST_CASE("autocorrelation cut is normalized at lag zero") {
    Rng rng(1);
    const WaveformConfig cfg;
    const AutocorrelationCut cut = zero_doppler_cut(WaveformId::OFDM, cfg, MetricsConfig{}, rng);
    CHECK(cut.magnitude.front() == 1.0);
    CHECK(cut.lag_samples[1] == doctest::Approx(1.0 / 8.0));
    for (const double v : cut.magnitude) {
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("first null of a sampled parabola") {
    AutocorrelationCut cut;
    for (int m = 0; m < 20; ++m) {
        const double x = m * 0.25;
        cut.lag_samples.push_back(x);
        cut.magnitude.push_back((x - 1.1) * (x - 1.1) + 0.01);
    }
    CHECK(first_null_lag(cut) == doctest::Approx(1.1).epsilon(1e-9));
}

TEST_CASE("noiseless flat channel gives zero bit errors") {
    const Scenario sc = flat_scenario(20e6, kNoiseless);
    const WaveformConfig base;
    for (const auto id : kAllWaveforms) {
        CAPTURE(to_string(id));
        Rng rng(2);
        const MetricsConfig mc = quick();
        const CommMetrics c = measure_comm(id, sc, base, mc, rng);
        const double floor = 1.0 / (2.0 * static_cast<double>(mc.comm_frames * bits_per_frame(id, base)));
        CHECK(c.ber == doctest::Approx(floor));
    }
}

TEST_CASE("BER does not rise with SNR") {
    const WaveformConfig base;
    for (const auto id : kAllWaveforms) {
        CAPTURE(to_string(id));
        Rng a(3);
        Rng b(3);
        const double low = measure_comm(id, faded_scenario(0.0), base, quick(), a).ber;
        const double high = measure_comm(id, faded_scenario(20.0), base, quick(), b).ber;
        CHECK(high <= low);
        CHECK(low <= 0.5);
        CHECK(high >= 0.0);
    }
}

TEST_CASE("throughput identity and FMCW spectral efficiency") {
    const WaveformConfig base;
    const MetricsConfig mc = quick();
    const Scenario sc = flat_scenario(50e6, 30.0);
    for (const auto id : kAllWaveforms) {
        Rng rng(4);
        const CommMetrics c = measure_comm(id, sc, base, mc, rng);
        CHECK(c.throughput == doctest::Approx(c.spectral_efficiency * 50e6 * (1.0 - mc.overhead[index_of(id)])));
        if (id == WaveformId::FMCW) {
            CHECK(c.spectral_efficiency < 0.1);
        }
    }
}

TEST_CASE("joint metrics") {
    const WaveformConfig base;
    const MetricsConfig mc;
    const Scenario sc = flat_scenario(20e6, 10.0);
    const JointMetrics ofdm = measure_joint(WaveformId::OFDM, sc, base, mc, 1e7);
    const JointMetrics otfs = measure_joint(WaveformId::OTFS, sc, base, mc, 1e7);
    const JointMetrics fmcw = measure_joint(WaveformId::FMCW, sc, base, mc, 1e7);
    const JointMetrics single = measure_joint(WaveformId::SC, sc, base, mc, 1e7);
    REQUIRE(frame_samples(WaveformId::OTFS, base) == frame_samples(WaveformId::OFDM, base));
    CHECK(otfs.latency_s > ofdm.latency_s);
    CHECK(std::abs(fmcw.papr_db) < 1e-9);
    CHECK(ofdm.papr_db > single.papr_db);
    CHECK(ofdm.energy_efficiency < single.energy_efficiency);
    CHECK(fmcw.energy_efficiency == doctest::Approx(1e7 / mc.tx_power_w));
    for (const auto& j : {ofdm, otfs, fmcw, single}) {
        CHECK(j.papr_db >= 0.0);
        CHECK(j.latency_s > 0.0);
        CHECK(j.energy_efficiency > 0.0);
    }
}

TEST_CASE("metrics are reproducible from the scenario seed") {
    const Scenario sc = faded_scenario(8.0);
    const RawMetrics a = measure_all(WaveformId::OCDM, sc, WaveformConfig{}, quick());
    const RawMetrics b = measure_all(WaveformId::OCDM, sc, WaveformConfig{}, quick());
    CHECK(a.comm.ber == b.comm.ber);
    CHECK(a.sensing.asl_db == b.sensing.asl_db);
    CHECK(a.joint.papr_db == b.joint.papr_db);
}

TEST_CASE("metrics config validation") {
    MetricsConfig m;
    m.latency_factor[2] = 0.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    MetricsConfig o;
    o.overhead[0] = 1.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
}

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "isacwave/errors.hpp"
#include "isacwave/scenario.hpp"

using namespace isacwave;

TEST_CASE("demand mix lies on the simplex") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const DemandMix m = sample_demand_mix(rng);
        CHECK(std::abs(m.rho_s + m.rho_c + m.rho_sc - 1.0) <= 1e-12);
        CHECK(m.rho_s >= 0.0);
        CHECK(m.rho_c >= 0.0);
        CHECK(m.rho_sc >= 0.0);
        CHECK(m.valid());
    }
}

TEST_CASE("disabled joint demand stays on the rho_s + rho_c edge") {
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        const DemandMix m = sample_demand_mix(rng, {true, true, false});
        CHECK(m.rho_sc == 0.0);
        CHECK(std::abs(m.rho_s + m.rho_c - 1.0) <= 1e-12);
        CHECK(m.valid());
    }
}

TEST_CASE("uniform simplex components average one third") {
    Rng rng(3);
    std::array<double, 3> sum{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto a = sample_demand_mix(rng).as_array();
        for (std::size_t k = 0; k < 3; ++k) {
            sum[k] += a[k];
        }
    }
    for (const double s : sum) {
        CHECK(std::abs(s / n - 1.0 / 3.0) < 0.01);
    }
}

TEST_CASE("low mobility bounds every path Doppler by f_c v / c") {
    ScenarioConfig cfg;
    cfg.mobility_classes = {{0.0, 3.0}};
    const double bound = cfg.carrier_hz * 3.0 / kSpeedOfLight;
    CHECK(bound == doctest::Approx(280.0));
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        const ChannelDraw d = sample_channel(rng, cfg);
        for (const auto& u : d.users) {
            for (const auto& p : u.channel.paths) {
                CHECK(std::abs(p.doppler_hz) <= bound + 1e-9);
            }
        }
    }
}

TEST_CASE("single-path users have zero delay spread") {
    ScenarioConfig cfg;
    cfg.min_paths = cfg.max_paths = 1;
    Rng rng(5);
    const ChannelDraw d = sample_channel(rng, cfg);
    for (const auto& u : d.users) {
        CHECK(path_spread(u.channel).rms_delay_s == 0.0);
    }
    CHECK(d.cell.tau_d_s == 0.0);
}

TEST_CASE("sampled path sets are power normalized and in range") {
    ScenarioConfig cfg;
    Rng rng(6);
    for (int i = 0; i < 20; ++i) {
        const ChannelDraw d = sample_channel(rng, cfg);
        CHECK(d.users.size() >= cfg.min_users);
        CHECK(d.users.size() <= cfg.max_users);
        CHECK(std::find(cfg.bandwidths_hz.begin(), cfg.bandwidths_hz.end(), d.bandwidth_hz) != cfg.bandwidths_hz.end());
        CHECK(d.cell.gamma > 0.0);
        CHECK(d.cell.tau_d_s >= cfg.delay_spread_s.min * (1 - 1e-9));
        CHECK(d.cell.tau_d_s <= cfg.delay_spread_s.max * (1 + 1e-9));
        CHECK(d.cell.nu_d_hz >= 0.0);
        for (const auto& u : d.users) {
            double power = 0.0;
            for (const auto& p : u.channel.paths) {
                power += std::norm(p.gain);
                CHECK(p.delay_s >= 0.0);
            }
            CHECK(std::abs(power - 1.0) <= 1e-12);
            CHECK(u.channel.paths.size() >= cfg.min_paths);
            CHECK(u.channel.paths.size() <= cfg.max_paths);
        }
    }
}

TEST_CASE("two equal paths at 0 and 2 us") {
    PathSet s;
    s.paths = {{{1.0, 0.0}, 0.0, 0.0}, {{0.0, 1.0}, 2e-6, 0.0}};
    const SpreadStats st = path_spread(s);
    CHECK(st.mean_delay_s == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(st.rms_delay_s == doctest::Approx(1e-6).epsilon(1e-12));
}

TEST_CASE("equal Doppler shifts have zero Doppler spread") {
    PathSet s;
    s.paths = {{{1.0, 0.0}, 0.0, 150.0}, {{0.5, 0.2}, 1e-7, 150.0}, {{0.1, 0.0}, 3e-7, 150.0}};
    CHECK(path_spread(s).rms_doppler_hz == doctest::Approx(0.0));
}

TEST_CASE("one user's SNR is the cell SNR") {
    PathSet s;
    s.paths = {{{1.0, 0.0}, 0.0, 0.0}};
    const std::vector<PathSet> sets{s};
    const std::vector<double> snr{12.5};
    CHECK(derive_descriptors(sets, snr).gamma == 12.5);
    CHECK(derive_descriptors(sets, snr).gamma_db() == doctest::Approx(10.0 * std::log10(12.5)));
}

TEST_CASE("spreads are invariant to path order and common delay shift") {
    Rng rng(7);
    ScenarioConfig cfg;
    const ChannelDraw d = sample_channel(rng, cfg);
    for (const auto& u : d.users) {
        const SpreadStats base = path_spread(u.channel);
        PathSet rev = u.channel;
        std::reverse(rev.paths.begin(), rev.paths.end());
        CHECK(path_spread(rev).rms_delay_s == doctest::Approx(base.rms_delay_s).epsilon(1e-12));
        CHECK(path_spread(rev).rms_doppler_hz == doctest::Approx(base.rms_doppler_hz).epsilon(1e-12));
        PathSet shifted = u.channel;
        for (auto& p : shifted.paths) {
            p.delay_s += 5e-7;
        }
        CHECK(path_spread(shifted).rms_delay_s == doctest::Approx(base.rms_delay_s).epsilon(1e-9));
    }
}

TEST_CASE("degenerate path sets are rejected") {
    PathSet empty;
    CHECK_THROWS_AS(path_spread(empty), std::domain_error);
    PathSet zero;
    zero.paths = {{{0.0, 0.0}, 0.0, 0.0}};
    CHECK_THROWS_AS(path_spread(zero), std::domain_error);
}

TEST_CASE("feature vector order") {
    Scenario s = sample_scenario(ScenarioConfig{}, 99);
    s.mix = {0.2, 0.5, 0.3};
    const FeatureVector f = build_feature_vector(s);
    CHECK(f[0] == 0.2);
    CHECK(f[1] == 0.5);
    CHECK(f[2] == 0.3);
    CHECK(f[3] == s.cell.gamma_db());
    CHECK(f[4] == s.cell.tau_d_s);
    CHECK(f[5] == s.cell.nu_d_hz);
    CHECK(f[6] == s.bandwidth_hz);
    CHECK(f[7] == s.mobility_mps);

    Scenario t = s;
    t.bandwidth_hz = s.bandwidth_hz * 2.0;
    const FeatureVector g = build_feature_vector(t);
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
        CHECK((f[i] != g[i]) == (i == 6));
    }
}

TEST_CASE("scenarios are a pure function of the seed") {
    const ScenarioConfig cfg;
    const Scenario a = sample_scenario(cfg, 1234);
    const Scenario b = sample_scenario(cfg, 1234);
    REQUIRE(a.users.size() == b.users.size());
    for (std::size_t u = 0; u < a.users.size(); ++u) {
        REQUIRE(a.users[u].channel.paths.size() == b.users[u].channel.paths.size());
        for (std::size_t l = 0; l < a.users[u].channel.paths.size(); ++l) {
            CHECK(a.users[u].channel.paths[l].gain == b.users[u].channel.paths[l].gain);
            CHECK(a.users[u].channel.paths[l].delay_s == b.users[u].channel.paths[l].delay_s);
            CHECK(a.users[u].channel.paths[l].doppler_hz == b.users[u].channel.paths[l].doppler_hz);
        }
    }
    CHECK(build_feature_vector(a) == build_feature_vector(b));
    CHECK(build_feature_vector(a) != build_feature_vector(sample_scenario(cfg, 1235)));
    CHECK(a.echoes.echoes.size() >= cfg.min_echoes);
    CHECK(a.echoes.echoes.size() <= cfg.max_echoes);
}

TEST_CASE("realization converts delays to samples") {
    PathSet s;
    s.paths = {{{1.0, 0.0}, 1e-7, 10.0}};
    const ChannelRealization r = to_realization(s, 50e6);
    REQUIRE(r.paths.size() == 1);
    CHECK(r.paths[0].delay_samples == doctest::Approx(5.0));
    CHECK(r.paths[0].doppler_hz == 10.0);
    CHECK(r.sample_rate_hz == 50e6);
}

TEST_CASE("scenario config validation names the field") {
    ScenarioConfig cfg;
    cfg.min_paths = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    ScenarioConfig bad;
    bad.bandwidths_hz.clear();
    try {
        bad.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).rfind("scenario.", 0) == 0);
    }
}

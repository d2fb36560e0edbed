#include <string>

#include "doctest.h"
#include "isacwave/config.hpp"
#include "isacwave/errors.hpp"
#include "support.hpp"

using namespace isacwave;

namespace {

std::string error_of(const std::string& json) {
    try {
        (void)config_from_json(json);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

} // namespace

TEST_CASE("empty document yields the defaults") {
    const Config c = config_from_json("{}");
    CHECK(c.seed == 42);
    CHECK(c.samples == 20000);
    CHECK(c.epsilon == 0.02);
    CHECK(c.waveform.subcarriers == 64);
    CHECK(c.learn.threshold == 0.5);
    CHECK(c.maps.resolution == 50);
    CHECK(config_hash(c) == config_hash(Config{}));
}

TEST_CASE("values merge over the defaults") {
    const Config c = config_from_json(R"({"seed": 7, "scenario": {"snr_db": {"min": 5, "max": 25}},
        "waveform": {"sc_pulse": "rrc"}, "learn": {"mlp": {"hidden": 32}}})");
    CHECK(c.seed == 7);
    CHECK(c.scenario.snr_db.min == 5.0);
    CHECK(c.scenario.snr_db.max == 25.0);
    CHECK(c.waveform.sc_pulse == PulseShape::RootRaisedCosine);
    CHECK(c.learn.mlp.hidden == 32);
    CHECK(c.samples == 20000);
}

TEST_CASE("canonical JSON round trips") {
    Config c;
    c.seed = 123;
    c.scenario.mobility_classes = {{0.0, 1.0}, {1.0, 5.0}};
    c.learn.boosting.rounds = 17;
    const Config back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    CHECK(config_hash(back) == config_hash(c));
}

TEST_CASE("hash ignores workers and tracks everything else") {
    Config a;
    Config b;
    b.workers = 8;
    b.learn.workers = 3;
    CHECK(config_hash(a) == config_hash(b));
    b.epsilon = 0.03;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("errors name the offending field") {
    CHECK(starts_with(error_of(R"({"bogus": 1})"), "bogus"));
    CHECK(starts_with(error_of(R"({"scenario": {"snr": 1}})"), "scenario.snr"));
    CHECK(starts_with(error_of(R"({"seed": "x"})"), "seed"));
    CHECK(starts_with(error_of(R"({"learn": {"mlp": {"hidden": -3}}})"), "learn.mlp.hidden"));
    CHECK(starts_with(error_of(R"({"waveform": {"sc_pulse": "sinc"}})"), "waveform.sc_pulse"));
    CHECK(starts_with(error_of(R"({"learn": {"threshold": 1.5}})"), "learn.threshold"));
    CHECK(starts_with(error_of(R"({"split": {"train": 0.9}})"), "split"));
    CHECK(starts_with(error_of(R"({"objectives": {"alpha": [1, 1, 0, 0]}})"), "objectives.alpha"));
    CHECK(starts_with(error_of(R"({"scenario": {"min_paths": 0}})"), "scenario.min_paths"));
    CHECK(starts_with(error_of(R"({"scenario": {"min_users": 60}})"), "scenario.max_users"));
    CHECK(starts_with(error_of(R"({"waveform": {"otfs_delay_bins": 32}})"), "waveform.otfs_delay_bins"));
    CHECK(starts_with(error_of("{"), "config"));
}

TEST_CASE("load_config reads a file and reports a missing one") {
    testing::TempDir dir("cfg");
    CHECK_THROWS(load_config(dir.path() / "missing.json"));
    {
        std::ofstream out(dir.path() / "c.json");
        out << R"({"samples": 100})";
    }
    CHECK(load_config(dir.path() / "c.json").samples == 100);
}

TEST_CASE("resolved workers is positive") {
    Config c;
    CHECK(c.resolved_workers() >= 1);
    c.workers = 3;
    CHECK(c.resolved_workers() == 3);
}

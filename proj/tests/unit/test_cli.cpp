#include <cstdlib>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "isacwave");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    Result r;
    r.code = isacwave::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Small, fast pipeline settings.
fs::path write_config(const fs::path& dir) {
    const fs::path p = dir / "small.json";
    std::ofstream(p) << R"({
  "samples": 60,
  "metrics": {"comm_frames": 20, "papr_frames": 8, "sensing_frames": 2},
  "learn": {"forest": {"trees": 15}, "boosting": {"rounds": 20}, "mlp": {"max_epochs": 15}},
  "maps": {"resolution": 6}
})";
    return p;
}

/// Shared pipeline run: generate, train all kinds, evaluate, map.
class Pipeline {
public:
    explicit Pipeline(const std::string& tag) : dir_(tag) {
        cfg_ = write_config(dir_.path());
        const std::string out = dir_.path().string();
        steps_.push_back(invoke({"generate", "--config", cfg_.string(), "--seed", "7", "--out", out}));
        for (const char* kind : {"mlp", "rf", "gbt"}) {
            steps_.push_back(invoke({"train", "--config", cfg_.string(), "--seed", "7", "--out", out, "--model", kind}));
        }
        for (const char* kind : {"mlp", "oracle", "prior"}) {
            steps_.push_back(invoke({"eval", "--config", cfg_.string(), "--seed", "7", "--out", out, "--model", kind}));
        }
        steps_.push_back(invoke({"maps", "--config", cfg_.string(), "--seed", "7", "--out", out, "--model", "rf"}));
        steps_.push_back(invoke({"report", "--out", out}));
    }
    [[nodiscard]] const fs::path& dir() const { return dir_.path(); }
    [[nodiscard]] const fs::path& config() const { return cfg_; }
    [[nodiscard]] const std::vector<Result>& steps() const { return steps_; }
    [[nodiscard]] std::string file(const std::string& rel) const { return testing::slurp(dir_.path() / rel); }

private:
    testing::TempDir dir_;
    fs::path cfg_;
    std::vector<Result> steps_;
};

const Pipeline& first() {
    static const Pipeline p("cli_a");
    return p;
}

} // namespace

TEST_CASE("pipeline steps succeed and write their outputs") {
    const Pipeline& p = first();
    for (const auto& s : p.steps()) {
        CAPTURE(s.err);
        CHECK(s.code == 0);
    }
    for (const char* f : {"dataset.jsonl", "manifest.json", "resolved_config.json", "model_mlp.json", "model_rf.json",
                          "model_gbt.json", "train_mlp_validation.json", "eval_mlp_test.json", "eval_oracle_test.json",
                          "eval_prior_test.json", "report.json", "report.txt"}) {
        CAPTURE(f);
        CHECK(fs::exists(p.dir() / f));
    }
    std::size_t svgs = 0;
    std::size_t csvs = 0;
    for (const auto& e : fs::directory_iterator(p.dir() / "maps")) {
        svgs += e.path().extension() == ".svg" ? 1 : 0;
        csvs += e.path().extension() == ".csv" ? 1 : 0;
    }
    CHECK(svgs == 40);
    CHECK(csvs == 8);
    CHECK(p.steps().front().out.find("pareto set size: mean") != std::string::npos);
}

TEST_CASE("oracle evaluation is perfect") {
    const auto j = nlohmann::json::parse(first().file("eval_oracle_test.json"));
    CHECK(j["reports"][0]["mean_utility_regret"].get<double>() == 0.0);
    CHECK(j["reports"][0]["micro_f1"].get<double>() == 1.0);
    const auto report = nlohmann::json::parse(first().file("report.json"));
    CHECK(report["evaluations"].size() == 3);
    CHECK(report["dataset"]["samples"].get<int>() == 60);
}

TEST_CASE("a second run is byte-identical") {
    const Pipeline& a = first();
    const Pipeline b("cli_b");
    for (const char* f : {"dataset.jsonl", "manifest.json", "model_mlp.json", "model_rf.json", "model_gbt.json",
                          "train_mlp_validation.json", "train_rf_validation.json", "train_gbt_validation.json",
                          "eval_mlp_test.json", "maps/map_doppler-high.csv", "maps/map_snr-low.csv"}) {
        CAPTURE(f);
        CHECK(a.file(f) == b.file(f));
    }
    CHECK(a.file("resolved_config.json") == b.file("resolved_config.json"));
}

TEST_CASE("worker count does not change the dataset") {
    testing::TempDir dir("cli_workers");
    const fs::path cfg = write_config(dir.path());
    const std::string out = (dir.path() / "w3").string();
    REQUIRE(invoke({"generate", "--config", cfg.string(), "--seed", "7", "--out", out, "--workers", "3"}).code == 0);
    CHECK(testing::slurp(fs::path(out) / "dataset.jsonl") == first().file("dataset.jsonl"));
}

TEST_CASE("usage and configuration errors exit with 1") {
    const Pipeline& p = first();
    const std::string out = p.dir().string();
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"frobnicate"}).code == 1);
    CHECK(invoke({"generate", "--n", "abc"}).code == 1);
    CHECK(invoke({"--help"}).code == 0);

    const Result regime = invoke({"maps", "--out", out, "--model", "rf", "--regime", "doppler-extreme"});
    CHECK(regime.code == 1);
    CHECK(regime.err.find("doppler-extreme") != std::string::npos);
    CHECK(invoke({"train", "--out", out, "--model", "svm"}).code == 1);
    CHECK(invoke({"eval", "--out", out, "--model", "oracle", "--split", "holdout"}).code == 1);

    const fs::path bad = p.dir() / "bad.json";
    std::ofstream(bad) << R"({"scenario": {"bandwidth": [1, 2]}})";
    const Result cfg = invoke({"generate", "--config", bad.string(), "--out", out});
    CHECK(cfg.code == 1);
    CHECK(cfg.err.find("scenario.bandwidth") != std::string::npos);
    const Result missing = invoke({"generate", "--config", (p.dir() / "absent.json").string(), "--out", out});
    CHECK(missing.code != 0);
    CHECK(missing.err.find("absent.json") != std::string::npos);
}

TEST_CASE("runtime failures exit with 2") {
    testing::TempDir empty("cli_empty");
    CHECK(invoke({"train", "--out", empty.path().string(), "--model", "rf"}).code == 2);
    CHECK(invoke({"maps", "--out", empty.path().string(), "--model", "gbt"}).code == 2);
}

TEST_CASE("output directory defaults to ISACWAVE_OUT") {
    testing::TempDir dir("cli_env");
    const fs::path cfg = write_config(dir.path());
    ::setenv("ISACWAVE_OUT", (dir.path() / "env").string().c_str(), 1);
    const Result r = invoke({"generate", "--config", cfg.string(), "--n", "3", "--seed", "1"});
    ::unsetenv("ISACWAVE_OUT");
    CHECK(r.code == 0);
    CHECK(fs::exists(dir.path() / "env" / "dataset.jsonl"));
    CHECK(fs::exists(dir.path() / "env" / "resolved_config.json"));
}

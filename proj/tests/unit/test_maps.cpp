#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "isacwave/maps.hpp"
#include "support.hpp"

using namespace isacwave;

namespace {

TrainedModel toy_model(ModelKind kind, bool constant) {
    Rng rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Eigen::Index n = 300;
    Eigen::MatrixXd x(n, 8);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, 5);
    for (Eigen::Index r = 0; r < n; ++r) {
        const double a = u(rng);
        const double b = u(rng) * (1.0 - a);
        x.row(r) << a, b, 1.0 - a - b, 30.0 * u(rng), 2e-6 * u(rng), 500.0 * u(rng), 20e6 + 180e6 * u(rng),
            120.0 * u(rng);
        if (constant) {
            y(r, 0) = 1.0;
        } else {
            y(r, 3) = a > 0.4 ? 1.0 : 0.0;
            y(r, 0) = b > 0.3 ? 1.0 : 0.0;
            y(r, 4) = 1.0;
        }
    }
    LearnConfig c;
    c.forest.trees = 20;
    c.boosting.rounds = 30;
    c.mlp.max_epochs = 30;
    return fit(kind, x, y, x, y, c, 2);
}

} // namespace

TEST_CASE("simplex grid") {
    CHECK(simplex_grid(10).size() == 66);
    const auto corners = simplex_grid(1);
    REQUIRE(corners.size() == 3);
    CHECK(corners[0].rho_s == 0.0);
    CHECK(corners[0].rho_c == 0.0);
    CHECK(corners[1].rho_c == 1.0);
    CHECK(corners[2].rho_s == 1.0);
    for (const auto& p : simplex_grid(37)) {
        const double rho_sc = 1.0 - p.rho_s - p.rho_c;
        CHECK(rho_sc >= -1e-12);
        CHECK(rho_sc <= 1.0);
    }
    CHECK_THROWS_AS(simplex_grid(0), std::invalid_argument);
}

TEST_CASE("regimes move exactly one descriptor") {
    FeatureQuantiles q;
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
        q.p10[f] = 1.0 + static_cast<double>(f);
        q.p50[f] = 10.0 + static_cast<double>(f);
        q.p90[f] = 100.0 + static_cast<double>(f);
    }
    CHECK(regime_names().size() == 8);
    const RegimeSpec hi = make_regime("doppler-high", q);
    CHECK(hi.doppler_spread_hz == 105.0);
    CHECK(hi.delay_spread_s == 14.0);
    CHECK(hi.snr_db == 13.0);
    CHECK(hi.bandwidth_hz == 16.0);
    CHECK(hi.mobility_mps == 17.0);
    CHECK(make_regime("band-narrow", q).bandwidth_hz == 7.0);
    CHECK(make_regime("snr-low", q).snr_db == 4.0);
    CHECK_THROWS_AS(make_regime("doppler-extreme", q), std::invalid_argument);

    const FeatureVector f = regime_features(hi, {0.25, 0.5});
    CHECK(f[2] == 0.25);
    CHECK(f[5] == 105.0);
}

TEST_CASE("top two selection") {
    CHECK(top_two({0.1, 0.9, 0.3, 0.8, 0.0}) == LabelVector{0, 1, 0, 1, 0});
    CHECK(top_two({0.5, 0.5, 0.5, 0.5, 0.5}) == LabelVector{1, 1, 0, 0, 0});
    CHECK(top_two({0.2, 0.9, 0.4, 0.4, 0.0}) == LabelVector{0, 1, 1, 0, 0});
}

TEST_CASE("maps have exactly two active waveforms per cell") {
    for (const auto kind : {ModelKind::Mlp, ModelKind::RandomForest, ModelKind::GradientBoosting}) {
        CAPTURE(to_string(kind));
        const TrainedModel m = toy_model(kind, false);
        for (const auto& name : regime_names()) {
            const SelectionMap map = selection_map(m, make_regime(name, m.quantiles), 12);
            REQUIRE(map.grid.size() == 91);
            for (const auto& a : map.active) {
                CHECK(std::count(a.begin(), a.end(), std::uint8_t{1}) == 2);
            }
            const auto counts = map.active_counts();
            CHECK(std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == 2 * map.grid.size());
        }
    }
}

TEST_CASE("a constant-label model keeps waveform 0 active everywhere") {
    const TrainedModel m = toy_model(ModelKind::GradientBoosting, true);
    const SelectionMap map = selection_map(m, make_regime("snr-high", m.quantiles), 8);
    CHECK(map.active_counts()[0] == map.grid.size());
}

TEST_CASE("map files and determinism") {
    const TrainedModel m = toy_model(ModelKind::RandomForest, false);
    const RegimeSpec regime = make_regime("delay-high", m.quantiles);
    const SelectionMap map = selection_map(m, regime, 10);
    const std::string csv = map_to_csv(map);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == map.grid.size() + 1);
    CHECK(csv.rfind("rho_s,rho_c,score_0", 0) == 0);
    CHECK(map_to_csv(selection_map(m, regime, 10)) == csv);

    testing::TempDir dir("maps");
    const auto files = render_map(map, dir.path());
    REQUIRE(files.size() == 6);
    std::size_t svgs = 0;
    for (const auto& f : files) {
        CHECK(std::filesystem::exists(f));
        svgs += f.extension() == ".svg" ? 1 : 0;
    }
    CHECK(svgs == 5);
    CHECK(testing::slurp(dir.path() / "map_delay-high.csv") == csv);
    const std::string svg = testing::slurp(dir.path() / "map_delay-high_OTFS.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(svg.begin(), svg.end(), '\n')) > map.grid.size());

    TrainedModel untrained;
    CHECK_THROWS_AS(selection_map(untrained, regime, 5), std::logic_error);
}

#include <cmath>

#include "doctest.h"
#include "isacwave/errors.hpp"
#include "isacwave/objectives.hpp"
#include "isacwave/pareto.hpp"

using namespace isacwave;

namespace {

std::vector<MetricRow> rows_with(Metric m, std::initializer_list<double> values) {
    std::vector<MetricRow> rows;
    for (const double v : values) {
        MetricRow r{};
        r.fill(1.0);
        r[static_cast<std::size_t>(m)] = v;
        rows.push_back(r);
    }
    return rows;
}

std::vector<MetricRow> random_rows(Rng& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<MetricRow> rows(n);
    for (auto& r : rows) {
        for (auto& v : r) {
            v = u(rng);
        }
    }
    return rows;
}

} // namespace

TEST_CASE("min-max of a bigger-is-better column") {
    const auto out = normalize_across_candidates(rows_with(Metric::Throughput, {2.0, 4.0, 6.0}));
    const auto c = static_cast<std::size_t>(Metric::Throughput);
    CHECK(out[0][c] == 0.0);
    CHECK(out[1][c] == 0.5);
    CHECK(out[2][c] == 1.0);
}

TEST_CASE("equal candidates normalize to one half") {
    const auto out = normalize_across_candidates(rows_with(Metric::Ber, {0.3, 0.3, 0.3}));
    for (const auto& r : out) {
        for (const double v : r) {
            CHECK(v == 0.5);
        }
    }
}

TEST_CASE("lower-is-better columns are inverted") {
    const auto out = normalize_across_candidates(rows_with(Metric::Ber, {0.0, 0.1}));
    const auto c = static_cast<std::size_t>(Metric::Ber);
    CHECK(out[0][c] == 1.0);
    CHECK(out[1][c] == 0.0);
    CHECK(higher_is_better(Metric::SpectralEfficiency));
    CHECK_FALSE(higher_is_better(Metric::Papr));
    CHECK_THROWS_AS(normalize_across_candidates(rows_with(Metric::Ber, {0.1})), std::invalid_argument);
}

TEST_CASE("normalization is invariant to positive affine maps of a column") {
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        auto rows = random_rows(rng, 5);
        const auto base = normalize_across_candidates(rows);
        const std::size_t col = static_cast<std::size_t>(t) % kNumMetrics;
        for (auto& r : rows) {
            r[col] = 2.5 * r[col] + 7.0;
        }
        const auto moved = normalize_across_candidates(rows);
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t c = 0; c < kNumMetrics; ++c) {
                CHECK(moved[i][c] == doctest::Approx(base[i][c]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("objective scores") {
    const ObjectiveWeights w;
    MetricRow ones{};
    ones.fill(1.0);
    const ObjectiveScores all = score(ones, w);
    CHECK(all.j_s == doctest::Approx(1.0));
    CHECK(all.j_c == doctest::Approx(1.0));
    CHECK(all.j_j == doctest::Approx(1.0));

    MetricRow r{};
    r[static_cast<std::size_t>(Metric::RangeResolution)] = 1.0;
    r[static_cast<std::size_t>(Metric::PeakSidelobe)] = 1.0;
    CHECK(score(r, w).j_s == doctest::Approx(0.5));

    ObjectiveWeights single;
    single.beta = {0.0, 1.0, 0.0};
    MetricRow q{};
    q[static_cast<std::size_t>(Metric::SpectralEfficiency)] = 0.37;
    q[static_cast<std::size_t>(Metric::Ber)] = 0.9;
    CHECK(score(q, single).j_c == doctest::Approx(0.37));
}

TEST_CASE("demand weighting") {
    const ObjectiveScores s{0.9, 0.6, 0.3};
    const ObjectiveVector v = demand_weight(s, DemandMix{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    CHECK(v[0] == doctest::Approx(0.3));
    CHECK(v[1] == doctest::Approx(0.2));
    CHECK(v[2] == doctest::Approx(0.1));
    const ObjectiveVector only_s = demand_weight(s, DemandMix{1.0, 0.0, 0.0});
    CHECK(only_s == ObjectiveVector{0.9, 0.0, 0.0});
    CHECK(demand_weight(ObjectiveScores{}, DemandMix{0.2, 0.3, 0.5}) == ObjectiveVector{0.0, 0.0, 0.0});
}

TEST_CASE("objective vectors lie in the unit cube and respect absent demand") {
    Rng rng(2);
    const ObjectiveWeights w;
    for (int t = 0; t < 200; ++t) {
        const auto rows = random_rows(rng, 5);
        const DemandMix mix{0.4, 0.6, 0.0};
        const auto v = objective_vectors(rows, w, mix);
        REQUIRE(v.size() == 5);
        std::vector<std::vector<double>> two;
        for (const auto& o : v) {
            for (const double x : o) {
                CHECK(x >= 0.0);
                CHECK(x <= 1.0);
            }
            CHECK(o[2] == 0.0);
            two.push_back({o[0], o[1]});
        }
        CHECK(pareto_set(v) == pareto_set(two));
    }
}

TEST_CASE("weight validation") {
    ObjectiveWeights w;
    w.alpha = {0.5, 0.5, 0.5, 0.0};
    CHECK_THROWS_AS(w.validate(), ConfigError);
    ObjectiveWeights n;
    n.gamma = {1.5, -0.5, 0.0};
    CHECK_THROWS_AS(n.validate(), ConfigError);
    CHECK_NOTHROW(ObjectiveWeights{}.validate());
}

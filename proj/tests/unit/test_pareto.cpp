#include <algorithm>

#include "doctest.h"
#include "isacwave/pareto.hpp"

using namespace isacwave;

namespace {

using Vec = std::vector<double>;

// Exhaustive pairwise oracle, written independently of the library.
std::vector<std::size_t> brute_force(const std::vector<Vec>& v) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < v.size() && !dominated; ++j) {
            bool ge = true;
            bool gt = false;
            for (std::size_t d = 0; d < v[i].size(); ++d) {
                ge = ge && v[j][d] >= v[i][d];
                gt = gt || v[j][d] > v[i][d];
            }
            dominated = j != i && ge && gt;
        }
        if (!dominated) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<Vec> random_instance(Rng& rng, std::size_t n, std::size_t d, bool coarse) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> grid(0, 3);
    std::vector<Vec> v(n, Vec(d));
    for (auto& row : v) {
        for (auto& x : row) {
            x = coarse ? grid(rng) / 3.0 : u(rng);
        }
    }
    return v;
}

} // namespace

TEST_CASE("dominance examples") {
    CHECK(dominates(Vec{1, 1, 1}, Vec{0.5, 0.5, 0.5}));
    CHECK_FALSE(dominates(Vec{1, 0, 0}, Vec{0, 1, 0}));
    CHECK_FALSE(dominates(Vec{0, 1, 0}, Vec{1, 0, 0}));
    CHECK_FALSE(dominates(Vec{0.3, 0.3, 0.3}, Vec{0.3, 0.3, 0.3}));
    CHECK_THROWS_AS(dominates(Vec{1, 2}, Vec{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("pareto set examples") {
    const std::vector<Vec> a{{1, 0}, {0, 1}, {0.5, 0.5}};
    CHECK(pareto_set(a) == std::vector<std::size_t>{0, 1, 2});
    const std::vector<Vec> b{{1, 1}, {0.5, 0.5}};
    CHECK(pareto_set(b) == std::vector<std::size_t>{0});
    CHECK_THROWS(pareto_set(std::vector<Vec>{}));
}

TEST_CASE("pareto set matches the brute-force oracle") {
    Rng rng(1);
    for (int t = 0; t < 10000; ++t) {
        const auto v = random_instance(rng, 5, 3, t % 2 == 0);
        REQUIRE(pareto_set(v) == brute_force(v));
    }
}

TEST_CASE("epsilon filter examples") {
    const std::vector<Vec> v{{0.60, 0.50}, {0.52, 0.52}};
    const auto strict = pareto_set(v);
    REQUIRE(strict.size() == 2);
    CHECK(epsilon_filter(v, strict, 0.05) == std::vector<std::size_t>{0});
    CHECK(epsilon_filter(v, strict, 0.0) == strict);

    const std::vector<Vec> w{{0.60, 0.40}, {0.40, 0.60}};
    CHECK(epsilon_filter(w, pareto_set(w), 0.05) == std::vector<std::size_t>{0, 1});
    CHECK(epsilon_dominates(Vec{0.60, 0.50}, Vec{0.52, 0.52}, 0.05));
    CHECK_FALSE(epsilon_dominates(Vec{0.60, 0.40}, Vec{0.40, 0.60}, 0.05));
}

TEST_CASE("epsilon filter is a non-empty subset and vanishes at zero") {
    Rng rng(2);
    for (int t = 0; t < 10000; ++t) {
        const auto v = random_instance(rng, 5, 3, t % 3 == 0);
        const auto strict = pareto_set(v);
        CHECK(epsilon_filter(v, strict, 0.0) == strict);
        const auto f = epsilon_filter(v, strict, 0.02);
        REQUIRE_FALSE(f.empty());
        CHECK(std::includes(strict.begin(), strict.end(), f.begin(), f.end()));
    }
}

TEST_CASE("dominance is irreflexive, asymmetric and transitive") {
    Rng rng(3);
    std::uniform_real_distribution<double> eps(0.0, 0.1);
    for (int t = 0; t < 5000; ++t) {
        const auto v = random_instance(rng, 3, 3, true);
        CHECK_FALSE(dominates(v[0], v[0]));
        if (dominates(v[0], v[1]) && dominates(v[1], v[2])) {
            CHECK(dominates(v[0], v[2]));
        }
        const double e = t % 2 == 0 ? 0.0 : eps(rng);
        CHECK_FALSE((epsilon_dominates(v[0], v[1], e) && epsilon_dominates(v[1], v[0], e)));
    }
}

TEST_CASE("label encoding") {
    const std::vector<std::size_t> a{0, 3};
    CHECK(encode_labels(a, 5) == LabelBits{1, 0, 0, 1, 0});
    const std::vector<std::size_t> all{0, 1, 2, 3, 4};
    CHECK(encode_labels(all, 5) == LabelBits{1, 1, 1, 1, 1});
    const std::vector<std::size_t> one{2};
    CHECK(encode_labels(one, 5) == LabelBits{0, 0, 1, 0, 0});
    const std::vector<std::size_t> bad{5};
    CHECK_THROWS_AS(encode_labels(bad, 5), std::out_of_range);
}

TEST_CASE("objective-vector overloads agree with the generic ones") {
    Rng rng(4);
    for (int t = 0; t < 500; ++t) {
        const auto v = random_instance(rng, 5, 3, t % 2 == 0);
        std::vector<ObjectiveVector> o;
        for (const auto& r : v) {
            o.push_back({r[0], r[1], r[2]});
        }
        CHECK(pareto_set(o) == pareto_set(v));
        CHECK(epsilon_filter(o, pareto_set(o), 0.02) == epsilon_filter(v, pareto_set(v), 0.02));
    }
}

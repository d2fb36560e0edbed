#include "isacwave/pareto.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace isacwave {

namespace {

std::vector<std::vector<double>> widen(std::span<const ObjectiveVector> v) {
    std::vector<std::vector<double>> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        out.emplace_back(x.begin(), x.end());
    }
    return out;
}

} // namespace

bool dominates(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dominates: dimension mismatch");
    }
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) {
            return false;
        }
        strict = strict || a[i] > b[i];
    }
    return strict;
}

bool epsilon_dominates(std::span<const double> a, std::span<const double> b, double eps) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("epsilon_dominates: dimension mismatch");
    }
    bool clear = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - eps) {
            return false;
        }
        clear = clear || a[i] > b[i] + eps;
    }
    return clear;
}

std::vector<std::size_t> pareto_set(std::span<const std::vector<double>> vectors) {
    if (vectors.empty()) {
        throw std::invalid_argument("pareto_set: empty input");
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < vectors.size() && !dominated; ++j) {
            dominated = j != i && dominates(vectors[j], vectors[i]);
        }
        if (!dominated) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> pareto_set(std::span<const ObjectiveVector> vectors) {
    return pareto_set(widen(vectors));
}

std::vector<std::size_t> epsilon_filter(std::span<const std::vector<double>> vectors,
                                        std::span<const std::size_t> pareto, double eps) {
    if (!(eps >= 0.0)) {
        throw std::invalid_argument("epsilon_filter: epsilon must be non-negative");
    }
    for (std::size_t i : pareto) {
        if (i >= vectors.size()) {
            throw std::out_of_range("epsilon_filter: index out of range");
        }
    }
    std::vector<double> sums(vectors.size(), 0.0);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        sums[i] = std::accumulate(vectors[i].begin(), vectors[i].end(), 0.0);
    }
    std::vector<std::size_t> order(pareto.begin(), pareto.end());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return sums[a] != sums[b] ? sums[a] > sums[b] : a < b;
    });

    std::vector<std::size_t> kept;
    for (std::size_t b : order) {
        const bool covered = std::any_of(kept.begin(), kept.end(), [&](std::size_t a) {
            return epsilon_dominates(vectors[a], vectors[b], eps);
        });
        if (!covered) {
            kept.push_back(b);
        }
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::vector<std::size_t> epsilon_filter(std::span<const ObjectiveVector> vectors,
                                        std::span<const std::size_t> pareto, double eps) {
    return epsilon_filter(widen(vectors), pareto, eps);
}

LabelBits encode_labels(std::span<const std::size_t> indices, std::size_t k) {
    LabelBits y(k, 0);
    for (std::size_t i : indices) {
        if (i >= k) {
            throw std::out_of_range("encode_labels: index out of range");
        }
        y[i] = 1;
    }
    return y;
}

} // namespace isacwave

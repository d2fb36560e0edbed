#include "isacwave/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "isacwave/errors.hpp"

namespace isacwave {

namespace {

template <std::size_t N>
void check_group(const std::array<double, N>& w, const char* name) {
    double sum = 0.0;
    for (double v : w) {
        if (!(v >= 0.0)) {
            throw ConfigError(std::string(name) + " weights must be non-negative");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError(std::string(name) + " weights must sum to 1");
    }
}

template <std::size_t N>
double dot(const std::array<double, N>& w, const MetricRow& row, std::size_t offset) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        acc += w[i] * row[offset + i];
    }
    return acc;
}

} // namespace

MetricRow to_row(const RawMetrics& raw) {
    return {raw.sensing.range_resolution_m,
            raw.sensing.velocity_resolution_mps,
            raw.sensing.asl_db,
            raw.sensing.clutter_isl_db,
            raw.comm.ber,
            raw.comm.spectral_efficiency,
            raw.comm.throughput,
            raw.joint.papr_db,
            raw.joint.latency_s,
            raw.joint.energy_efficiency};
}

std::vector<MetricRow> normalize_across_candidates(std::span<const MetricRow> rows) {
    if (rows.size() < 2) {
        throw std::invalid_argument("normalize_across_candidates: need at least 2 candidates");
    }
    std::vector<MetricRow> out(rows.size());
    for (std::size_t c = 0; c < kNumMetrics; ++c) {
        double lo = rows[0][c];
        double hi = rows[0][c];
        for (const auto& r : rows) {
            if (!std::isfinite(r[c])) {
                throw std::domain_error("normalize_across_candidates: non-finite metric value");
            }
            lo = std::min(lo, r[c]);
            hi = std::max(hi, r[c]);
        }
        const bool up = higher_is_better(static_cast<Metric>(c));
        const double span = hi - lo;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (!(span > 0.0)) {
                out[k][c] = 0.5;
            } else {
                const double v = up ? (rows[k][c] - lo) / span : (hi - rows[k][c]) / span;
                out[k][c] = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return out;
}

void ObjectiveWeights::validate() const {
    check_group(alpha, "objectives.alpha");
    check_group(beta, "objectives.beta");
    check_group(gamma, "objectives.gamma");
}

ObjectiveScores score(const MetricRow& normalized, const ObjectiveWeights& w) {
    w.validate();
    return {dot(w.alpha, normalized, 0), dot(w.beta, normalized, 4), dot(w.gamma, normalized, 7)};
}

ObjectiveVector demand_weight(const ObjectiveScores& s, const DemandMix& mix) {
    return {mix.rho_s * s.j_s, mix.rho_c * s.j_c, mix.rho_sc * s.j_j};
}

std::vector<ObjectiveVector> objective_vectors(std::span<const MetricRow> rows, const ObjectiveWeights& weights,
                                               const DemandMix& mix) {
    const auto norm = normalize_across_candidates(rows);
    std::vector<ObjectiveVector> out;
    out.reserve(norm.size());
    for (const auto& r : norm) {
        out.push_back(demand_weight(score(r, weights), mix));
    }
    return out;
}

} // namespace isacwave

#include "isacwave/trees.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "isacwave/errors.hpp"
#include "isacwave/parallel.hpp"
#include "isacwave/rng.hpp"

namespace isacwave {

namespace {

constexpr std::size_t kMaxBins = 256;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<std::uint8_t> binary_column(const Eigen::MatrixXd& y, Eigen::Index c) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(y.rows()));
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
        const double v = y(r, c);
        if (v != 0.0 && v != 1.0) {
            throw std::invalid_argument("trees: labels must be 0 or 1");
        }
        out[static_cast<std::size_t>(r)] = v == 1.0 ? 1 : 0;
    }
    return out;
}

void check_shapes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    if (x.rows() == 0 || x.rows() != y.rows() || y.cols() == 0) {
        throw std::invalid_argument("trees: feature/label row mismatch");
    }
}

using Index = std::uint32_t;

// Grows one hard-vote Gini tree on a bootstrap index multiset.
class ForestGrower {
public:
    ForestGrower(const std::vector<std::uint8_t>& bins, std::size_t d, const std::vector<std::size_t>& bin_counts,
                 const std::vector<std::uint8_t>& y, const ForestParams& p, Rng& rng)
        : bins_(bins), d_(d), bin_counts_(bin_counts), y_(y), p_(p), rng_(rng) {
        features_.resize(d_);
        std::iota(features_.begin(), features_.end(), 0);
    }

    Tree grow(std::vector<Index>& idx) {
        tree_.clear();
        node(idx, 0, idx.size(), 0);
        return std::move(tree_);
    }

private:
    std::int32_t node(std::vector<Index>& idx, std::size_t lo, std::size_t hi, std::size_t depth) {
        const auto self = static_cast<std::int32_t>(tree_.size());
        tree_.emplace_back();
        const std::size_t n = hi - lo;
        std::size_t pos = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            pos += y_[idx[i]];
        }
        tree_[static_cast<std::size_t>(self)].value = 2 * pos > n ? 1.0 : 0.0;
        if (depth >= p_.max_depth || n < p_.min_samples_split || pos == 0 || pos == n) {
            return self;
        }

        // Weighted Gini impurity n * (1 - p^2 - q^2) = 2 * pos * neg / n.
        const auto impurity = [](double total, double positives) {
            return total > 0.0 ? 2.0 * positives * (total - positives) / total : 0.0;
        };
        const double parent = impurity(static_cast<double>(n), static_cast<double>(pos));
        double best = parent - 1e-12;
        std::int32_t best_f = -1;
        std::int32_t best_b = 0;

        const std::size_t mtry = std::min(p_.features_per_split, d_);
        for (std::size_t k = 0; k < mtry; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, d_ - 1);
            std::swap(features_[k], features_[pick(rng_)]);
            const std::size_t f = features_[k];
            const std::size_t nb = bin_counts_[f];
            std::fill_n(count_.begin(), nb, 0);
            std::fill_n(positive_.begin(), nb, 0);
            for (std::size_t i = lo; i < hi; ++i) {
                const std::uint8_t b = bins_[idx[i] * d_ + f];
                ++count_[b];
                positive_[b] += y_[idx[i]];
            }
            std::size_t nl = 0;
            std::size_t pl = 0;
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                nl += count_[b];
                pl += positive_[b];
                if (nl == 0 || nl == n) {
                    continue;
                }
                const double score = impurity(static_cast<double>(nl), static_cast<double>(pl)) +
                                     impurity(static_cast<double>(n - nl), static_cast<double>(pos - pl));
                if (score < best) {
                    best = score;
                    best_f = static_cast<std::int32_t>(f);
                    best_b = static_cast<std::int32_t>(b);
                }
            }
        }
        if (best_f < 0) {
            return self;
        }
        const auto f = static_cast<std::size_t>(best_f);
        const auto mid = static_cast<std::size_t>(
            std::partition(idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(hi),
                           [&](Index i) { return bins_[i * d_ + f] <= best_b; }) -
            idx.begin());
        const std::int32_t left = node(idx, lo, mid, depth + 1);
        const std::int32_t right = node(idx, mid, hi, depth + 1);
        auto& me = tree_[static_cast<std::size_t>(self)];
        me.feature = best_f;
        me.bin = best_b;
        me.left = left;
        me.right = right;
        return self;
    }

    const std::vector<std::uint8_t>& bins_;
    std::size_t d_;
    const std::vector<std::size_t>& bin_counts_;
    const std::vector<std::uint8_t>& y_;
    const ForestParams& p_;
    Rng& rng_;
    std::vector<std::size_t> features_;
    std::array<std::size_t, kMaxBins> count_{};
    std::array<std::size_t, kMaxBins> positive_{};
    Tree tree_;
};

// Grows one second-order regression tree; also records each row's leaf value.
class BoostGrower {
public:
    BoostGrower(const std::vector<std::uint8_t>& bins, std::size_t d, const std::vector<std::size_t>& bin_counts,
                const BoostingParams& p)
        : bins_(bins), d_(d), bin_counts_(bin_counts), p_(p) {}

    Tree grow(const std::vector<double>& g, const std::vector<double>& h, std::vector<double>& leaf_of_row) {
        g_ = &g;
        h_ = &h;
        leaf_ = &leaf_of_row;
        idx_.resize(g.size());
        std::iota(idx_.begin(), idx_.end(), 0);
        tree_.clear();
        node(0, idx_.size(), 0);
        return std::move(tree_);
    }

private:
    double leaf_score(double gs, double hs) const { return gs * gs / (hs + p_.l2); }

    std::int32_t node(std::size_t lo, std::size_t hi, std::size_t depth) {
        const auto self = static_cast<std::int32_t>(tree_.size());
        tree_.emplace_back();
        double gs = 0.0;
        double hs = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            gs += (*g_)[idx_[i]];
            hs += (*h_)[idx_[i]];
        }
        const double weight = -gs / (hs + p_.l2);
        tree_[static_cast<std::size_t>(self)].value = weight;

        double best = 1e-12;
        std::int32_t best_f = -1;
        std::int32_t best_b = 0;
        if (depth < p_.max_depth && hi - lo >= 2) {
            const double parent = leaf_score(gs, hs);
            for (std::size_t f = 0; f < d_; ++f) {
                const std::size_t nb = bin_counts_[f];
                std::fill_n(gsum_.begin(), nb, 0.0);
                std::fill_n(hsum_.begin(), nb, 0.0);
                for (std::size_t i = lo; i < hi; ++i) {
                    const std::uint8_t b = bins_[idx_[i] * d_ + f];
                    gsum_[b] += (*g_)[idx_[i]];
                    hsum_[b] += (*h_)[idx_[i]];
                }
                double gl = 0.0;
                double hl = 0.0;
                for (std::size_t b = 0; b + 1 < nb; ++b) {
                    gl += gsum_[b];
                    hl += hsum_[b];
                    const double hr = hs - hl;
                    if (hl < p_.min_child_hessian || hr < p_.min_child_hessian) {
                        continue;
                    }
                    const double gain = leaf_score(gl, hl) + leaf_score(gs - gl, hr) - parent;
                    if (gain > best) {
                        best = gain;
                        best_f = static_cast<std::int32_t>(f);
                        best_b = static_cast<std::int32_t>(b);
                    }
                }
            }
        }
        if (best_f < 0) {
            for (std::size_t i = lo; i < hi; ++i) {
                (*leaf_)[idx_[i]] = weight;
            }
            return self;
        }
        const auto f = static_cast<std::size_t>(best_f);
        const auto mid = static_cast<std::size_t>(
            std::partition(idx_.begin() + static_cast<std::ptrdiff_t>(lo), idx_.begin() + static_cast<std::ptrdiff_t>(hi),
                           [&](Index i) { return bins_[i * d_ + f] <= best_b; }) -
            idx_.begin());
        if (mid == lo || mid == hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                (*leaf_)[idx_[i]] = weight;
            }
            return self;
        }
        const std::int32_t left = node(lo, mid, depth + 1);
        const std::int32_t right = node(mid, hi, depth + 1);
        auto& me = tree_[static_cast<std::size_t>(self)];
        me.feature = best_f;
        me.bin = best_b;
        me.left = left;
        me.right = right;
        return self;
    }

    const std::vector<std::uint8_t>& bins_;
    std::size_t d_;
    const std::vector<std::size_t>& bin_counts_;
    const BoostingParams& p_;
    const std::vector<double>* g_ = nullptr;
    const std::vector<double>* h_ = nullptr;
    std::vector<double>* leaf_ = nullptr;
    std::vector<Index> idx_;
    std::array<double, kMaxBins> gsum_{};
    std::array<double, kMaxBins> hsum_{};
    Tree tree_;
};

double logistic_loss(const std::vector<double>& margin, const std::vector<std::uint8_t>& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < margin.size(); ++i) {
        acc += softplus(margin[i]) - static_cast<double>(y[i]) * margin[i];
    }
    return acc / static_cast<double>(margin.size());
}

std::vector<std::size_t> bin_counts_of(const BinMapper& bins) {
    std::vector<std::size_t> out;
    out.reserve(bins.features());
    for (const auto& t : bins.thresholds()) {
        out.push_back(t.size() + 1);
    }
    return out;
}

void scale_leaves(Tree& tree, double factor) {
    for (auto& n : tree) {
        n.value *= factor;
    }
}

} // namespace

BinMapper::BinMapper(std::vector<std::vector<double>> thresholds) : thresholds_(std::move(thresholds)) {
    for (const auto& t : thresholds_) {
        if (t.size() + 1 > kMaxBins) {
            throw std::invalid_argument("BinMapper: too many thresholds");
        }
        if (!std::is_sorted(t.begin(), t.end()) || std::adjacent_find(t.begin(), t.end()) != t.end()) {
            throw std::invalid_argument("BinMapper: thresholds must be strictly increasing");
        }
    }
}

BinMapper BinMapper::fit(const Eigen::MatrixXd& x, std::size_t max_bins) {
    if (max_bins < 2 || max_bins > kMaxBins) {
        throw std::invalid_argument("BinMapper: max_bins must lie in [2, 256]");
    }
    if (x.rows() == 0) {
        throw std::invalid_argument("BinMapper: no rows");
    }
    std::vector<std::vector<double>> thresholds(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        std::vector<double> v(x.col(c).data(), x.col(c).data() + x.rows());
        std::sort(v.begin(), v.end());
        std::vector<double> uniq = v;
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        auto& t = thresholds[static_cast<std::size_t>(c)];
        if (uniq.size() <= max_bins) {
            for (std::size_t i = 0; i + 1 < uniq.size(); ++i) {
                t.push_back(0.5 * (uniq[i] + uniq[i + 1]));
            }
        } else {
            for (std::size_t q = 1; q < max_bins; ++q) {
                const double cut = v[q * v.size() / max_bins];
                if (cut < uniq.back() && (t.empty() || cut > t.back())) {
                    t.push_back(cut);
                }
            }
        }
    }
    return BinMapper(std::move(thresholds));
}

std::uint8_t BinMapper::bin(std::size_t feature, double value) const {
    const auto& t = thresholds_.at(feature);
    return static_cast<std::uint8_t>(std::lower_bound(t.begin(), t.end(), value) - t.begin());
}

std::vector<std::uint8_t> BinMapper::transform(const Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.cols()) != features()) {
        throw std::invalid_argument("BinMapper: feature dimension mismatch");
    }
    const std::size_t d = features();
    std::vector<std::uint8_t> out(static_cast<std::size_t>(x.rows()) * d);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (std::size_t f = 0; f < d; ++f) {
            out[static_cast<std::size_t>(r) * d + f] = bin(f, x(r, static_cast<Eigen::Index>(f)));
        }
    }
    return out;
}

double tree_value(const Tree& tree, std::span<const std::uint8_t> row_bins) {
    if (tree.empty()) {
        throw std::invalid_argument("tree_value: empty tree");
    }
    std::size_t at = 0;
    while (tree[at].feature >= 0) {
        const auto& n = tree[at];
        at = static_cast<std::size_t>(row_bins[static_cast<std::size_t>(n.feature)] <= n.bin ? n.left : n.right);
    }
    return tree[at].value;
}

void ForestParams::validate() const {
    if (trees == 0) {
        throw ConfigError("learn.forest.trees must be positive");
    }
    if (max_depth == 0) {
        throw ConfigError("learn.forest.max_depth must be positive");
    }
    if (features_per_split == 0) {
        throw ConfigError("learn.forest.features_per_split must be positive");
    }
    if (min_samples_split < 2) {
        throw ConfigError("learn.forest.min_samples_split must be at least 2");
    }
    if (max_bins < 2 || max_bins > kMaxBins) {
        throw ConfigError("learn.forest.max_bins must lie in [2, 256]");
    }
}

void BoostingParams::validate() const {
    if (rounds == 0) {
        throw ConfigError("learn.boosting.rounds must be positive");
    }
    if (max_depth == 0) {
        throw ConfigError("learn.boosting.max_depth must be positive");
    }
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        throw ConfigError("learn.boosting.learning_rate must lie in (0, 1]");
    }
    if (!(l2 >= 0.0)) {
        throw ConfigError("learn.boosting.l2 must be non-negative");
    }
    if (!(min_child_hessian >= 0.0)) {
        throw ConfigError("learn.boosting.min_child_hessian must be non-negative");
    }
    if (max_bins < 2 || max_bins > kMaxBins) {
        throw ConfigError("learn.boosting.max_bins must lie in [2, 256]");
    }
}

RandomForest::RandomForest(BinMapper bins, std::vector<std::vector<Tree>> forests)
    : bins_(std::move(bins)), forests_(std::move(forests)) {}

RandomForest RandomForest::fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const ForestParams& params,
                               std::uint64_t seed, std::size_t workers) {
    params.validate();
    check_shapes(x, y);
    BinMapper mapper = BinMapper::fit(x, params.max_bins);
    const std::vector<std::uint8_t> bins = mapper.transform(x);
    const std::vector<std::size_t> counts = bin_counts_of(mapper);
    const auto labels = static_cast<std::size_t>(y.cols());
    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());
    std::vector<std::vector<std::uint8_t>> targets;
    for (std::size_t k = 0; k < labels; ++k) {
        targets.push_back(binary_column(y, static_cast<Eigen::Index>(k)));
    }

    std::vector<std::vector<Tree>> forests(labels, std::vector<Tree>(params.trees));
    parallel_for(labels * params.trees, workers, [&](std::size_t job) {
        const std::size_t k = job / params.trees;
        const std::size_t t = job % params.trees;
        Rng rng(derive_seed(seed, job));
        std::uniform_int_distribution<std::size_t> draw(0, n - 1);
        std::vector<Index> idx(n);
        for (auto& i : idx) {
            i = static_cast<Index>(draw(rng));
        }
        ForestGrower grower(bins, d, counts, targets[k], params, rng);
        forests[k][t] = grower.grow(idx);
    });
    return RandomForest(std::move(mapper), std::move(forests));
}

Eigen::MatrixXd RandomForest::predict(const Eigen::MatrixXd& x) const {
    if (forests_.empty()) {
        throw std::logic_error("RandomForest: model is untrained");
    }
    const std::vector<std::uint8_t> bins = bins_.transform(x);
    const std::size_t d = bins_.features();
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(forests_.size()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const std::span<const std::uint8_t> row(bins.data() + static_cast<std::size_t>(r) * d, d);
        for (std::size_t k = 0; k < forests_.size(); ++k) {
            std::size_t votes = 0;
            for (const auto& tree : forests_[k]) {
                votes += tree_value(tree, row) > 0.5 ? 1 : 0;
            }
            out(r, static_cast<Eigen::Index>(k)) =
                static_cast<double>(votes) / static_cast<double>(forests_[k].size());
        }
    }
    return out;
}

GradientBoosting::GradientBoosting(BinMapper bins, std::vector<double> base, std::vector<std::vector<Tree>> ensembles)
    : bins_(std::move(bins)), base_(std::move(base)), ensembles_(std::move(ensembles)) {
    if (base_.size() != ensembles_.size()) {
        throw std::invalid_argument("GradientBoosting: base and ensemble label counts differ");
    }
}

GradientBoosting GradientBoosting::fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                       const BoostingParams& params, std::size_t workers,
                                       BoostingHistory* history) {
    params.validate();
    check_shapes(x, y);
    BinMapper mapper = BinMapper::fit(x, params.max_bins);
    const std::vector<std::uint8_t> bins = mapper.transform(x);
    const std::vector<std::size_t> counts = bin_counts_of(mapper);
    const auto labels = static_cast<std::size_t>(y.cols());
    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());

    std::vector<double> base(labels);
    std::vector<std::vector<Tree>> ensembles(labels);
    BoostingHistory losses(labels);
    parallel_for(labels, workers, [&](std::size_t k) {
        const std::vector<std::uint8_t> target = binary_column(y, static_cast<Eigen::Index>(k));
        const double rate = std::clamp(
            static_cast<double>(std::accumulate(target.begin(), target.end(), std::size_t{0})) / static_cast<double>(n),
            1e-6, 1.0 - 1e-6);
        base[k] = std::log(rate / (1.0 - rate));
        std::vector<double> margin(n, base[k]);
        double loss = logistic_loss(margin, target);
        losses[k].push_back(loss);

        BoostGrower grower(bins, d, counts, params);
        std::vector<double> g(n);
        std::vector<double> h(n);
        std::vector<double> leaf(n);
        std::vector<double> trial(n);
        bool stalled = false;
        for (std::size_t round = 0; round < params.rounds; ++round) {
            if (stalled) {
                losses[k].push_back(loss);
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double p = sigmoid(margin[i]);
                g[i] = p - static_cast<double>(target[i]);
                h[i] = std::max(p * (1.0 - p), 1e-16);
            }
            Tree tree = grower.grow(g, h, leaf);
            bool accepted = false;
            for (const double step : {1.0, 0.5}) {
                const double factor = params.learning_rate * step;
                for (std::size_t i = 0; i < n; ++i) {
                    trial[i] = margin[i] + factor * leaf[i];
                }
                const double candidate = logistic_loss(trial, target);
                if (candidate <= loss) {
                    scale_leaves(tree, factor);
                    ensembles[k].push_back(std::move(tree));
                    margin.swap(trial);
                    loss = candidate;
                    accepted = true;
                    break;
                }
            }
            // Without row or column sampling a rejected round would be regrown identically.
            stalled = !accepted;
            losses[k].push_back(loss);
        }
    });
    if (history != nullptr) {
        *history = std::move(losses);
    }
    return GradientBoosting(std::move(mapper), std::move(base), std::move(ensembles));
}

Eigen::MatrixXd GradientBoosting::margins(const Eigen::MatrixXd& x) const {
    if (base_.empty()) {
        throw std::logic_error("GradientBoosting: model is untrained");
    }
    const std::vector<std::uint8_t> bins = bins_.transform(x);
    const std::size_t d = bins_.features();
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(base_.size()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const std::span<const std::uint8_t> row(bins.data() + static_cast<std::size_t>(r) * d, d);
        for (std::size_t k = 0; k < base_.size(); ++k) {
            double m = base_[k];
            for (const auto& tree : ensembles_[k]) {
                m += tree_value(tree, row);
            }
            out(r, static_cast<Eigen::Index>(k)) = m;
        }
    }
    return out;
}

Eigen::MatrixXd GradientBoosting::predict(const Eigen::MatrixXd& x) const {
    return margins(x).unaryExpr([](double z) { return sigmoid(z); });
}

} // namespace isacwave

#include "isacwave/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "isacwave/errors.hpp"

namespace isacwave {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;
constexpr std::string_view kFormatName = "isacwave-model";

void check_binary(const Eigen::MatrixXd& labels) {
    for (Eigen::Index c = 0; c < labels.cols(); ++c) {
        for (Eigen::Index r = 0; r < labels.rows(); ++r) {
            const double v = labels(r, c);
            if (v != 0.0 && v != 1.0) {
                throw std::invalid_argument("fit: labels must be 0 or 1");
            }
        }
    }
}

double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw std::runtime_error("model file: ragged matrix");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Node layout: [feature, bin, left, right, value].
json tree_json(const Tree& tree) {
    json nodes = json::array();
    for (const auto& n : tree) {
        nodes.push_back(json::array({n.feature, n.bin, n.left, n.right, n.value}));
    }
    return nodes;
}

Tree tree_from(const json& j) {
    Tree tree;
    tree.reserve(j.size());
    for (const auto& n : j) {
        TreeNode node;
        node.feature = n.at(0).get<std::int32_t>();
        node.bin = n.at(1).get<std::int32_t>();
        node.left = n.at(2).get<std::int32_t>();
        node.right = n.at(3).get<std::int32_t>();
        node.value = n.at(4).get<double>();
        tree.push_back(node);
    }
    const auto size = static_cast<std::int32_t>(tree.size());
    for (const auto& n : tree) {
        if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size)) {
            throw std::runtime_error("model file: tree child index out of range");
        }
    }
    if (tree.empty()) {
        throw std::runtime_error("model file: empty tree");
    }
    return tree;
}

json ensembles_json(const std::vector<std::vector<Tree>>& ensembles) {
    json out = json::array();
    for (const auto& label : ensembles) {
        json trees = json::array();
        for (const auto& t : label) {
            trees.push_back(tree_json(t));
        }
        out.push_back(std::move(trees));
    }
    return out;
}

std::vector<std::vector<Tree>> ensembles_from(const json& j) {
    std::vector<std::vector<Tree>> out;
    for (const auto& label : j) {
        std::vector<Tree> trees;
        for (const auto& t : label) {
            trees.push_back(tree_from(t));
        }
        out.push_back(std::move(trees));
    }
    return out;
}

json config_json(const LearnConfig& c) {
    return json{
        {"mlp",
         {{"hidden", c.mlp.hidden},
          {"learning_rate", c.mlp.learning_rate},
          {"batch_size", c.mlp.batch_size},
          {"max_epochs", c.mlp.max_epochs},
          {"patience", c.mlp.patience},
          {"beta1", c.mlp.beta1},
          {"beta2", c.mlp.beta2},
          {"adam_epsilon", c.mlp.adam_epsilon}}},
        {"forest",
         {{"trees", c.forest.trees},
          {"max_depth", c.forest.max_depth},
          {"features_per_split", c.forest.features_per_split},
          {"min_samples_split", c.forest.min_samples_split},
          {"max_bins", c.forest.max_bins}}},
        {"boosting",
         {{"rounds", c.boosting.rounds},
          {"max_depth", c.boosting.max_depth},
          {"learning_rate", c.boosting.learning_rate},
          {"l2", c.boosting.l2},
          {"min_child_hessian", c.boosting.min_child_hessian},
          {"max_bins", c.boosting.max_bins}}},
        {"threshold", c.threshold},
    };
}

LearnConfig config_from(const json& j) {
    LearnConfig c;
    const json& m = j.at("mlp");
    c.mlp.hidden = m.at("hidden").get<std::size_t>();
    c.mlp.learning_rate = m.at("learning_rate").get<double>();
    c.mlp.batch_size = m.at("batch_size").get<std::size_t>();
    c.mlp.max_epochs = m.at("max_epochs").get<std::size_t>();
    c.mlp.patience = m.at("patience").get<std::size_t>();
    c.mlp.beta1 = m.at("beta1").get<double>();
    c.mlp.beta2 = m.at("beta2").get<double>();
    c.mlp.adam_epsilon = m.at("adam_epsilon").get<double>();
    const json& f = j.at("forest");
    c.forest.trees = f.at("trees").get<std::size_t>();
    c.forest.max_depth = f.at("max_depth").get<std::size_t>();
    c.forest.features_per_split = f.at("features_per_split").get<std::size_t>();
    c.forest.min_samples_split = f.at("min_samples_split").get<std::size_t>();
    c.forest.max_bins = f.at("max_bins").get<std::size_t>();
    const json& b = j.at("boosting");
    c.boosting.rounds = b.at("rounds").get<std::size_t>();
    c.boosting.max_depth = b.at("max_depth").get<std::size_t>();
    c.boosting.learning_rate = b.at("learning_rate").get<double>();
    c.boosting.l2 = b.at("l2").get<double>();
    c.boosting.min_child_hessian = b.at("min_child_hessian").get<double>();
    c.boosting.max_bins = b.at("max_bins").get<std::size_t>();
    c.threshold = j.at("threshold").get<double>();
    return c;
}

json feature_json(const FeatureVector& v) { return std::vector<double>(v.begin(), v.end()); }

FeatureVector feature_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != kNumFeatures) {
        throw std::runtime_error("model file: feature quantile has the wrong length");
    }
    FeatureVector out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

} // namespace

std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
    case ModelKind::Mlp:
        return "mlp";
    case ModelKind::RandomForest:
        return "rf";
    case ModelKind::GradientBoosting:
        return "gbt";
    }
    return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept {
    for (const auto k : {ModelKind::Mlp, ModelKind::RandomForest, ModelKind::GradientBoosting}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

void LearnConfig::validate() const {
    mlp.validate();
    forest.validate();
    boosting.validate();
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("learn.threshold must lie in (0, 1)");
    }
}

FeatureQuantiles feature_quantiles(const Eigen::MatrixXd& features) {
    if (features.rows() == 0 || features.cols() != static_cast<Eigen::Index>(kNumFeatures)) {
        throw std::invalid_argument("feature_quantiles: expected a non-empty n x 8 matrix");
    }
    FeatureQuantiles q;
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
        const auto col = features.col(static_cast<Eigen::Index>(f));
        std::vector<double> v(col.data(), col.data() + col.size());
        std::sort(v.begin(), v.end());
        q.p10[f] = quantile_sorted(v, 0.10);
        q.p50[f] = quantile_sorted(v, 0.50);
        q.p90[f] = quantile_sorted(v, 0.90);
    }
    return q;
}

TrainedModel fit(ModelKind kind, const Eigen::MatrixXd& features, const Eigen::MatrixXd& labels,
                 const Eigen::MatrixXd& val_features, const Eigen::MatrixXd& val_labels,
                 const LearnConfig& config, std::uint64_t seed) {
    config.validate();
    if (features.rows() == 0 || features.rows() != labels.rows()) {
        throw std::invalid_argument("fit: feature/label row mismatch");
    }
    if (features.cols() != static_cast<Eigen::Index>(kNumFeatures) ||
        labels.cols() != static_cast<Eigen::Index>(kNumWaveforms)) {
        throw std::invalid_argument("fit: expected 8 features and 5 labels");
    }
    if (val_features.rows() != val_labels.rows() ||
        (val_features.rows() > 0 && (val_features.cols() != features.cols() || val_labels.cols() != labels.cols()))) {
        throw std::invalid_argument("fit: validation feature/label mismatch");
    }
    check_binary(labels);
    check_binary(val_labels);

    TrainedModel out;
    out.kind = kind;
    out.seed = seed;
    out.config = config;
    out.standardizer = Standardizer::fit(features);
    out.quantiles = feature_quantiles(features);
    const Eigen::MatrixXd x = out.standardizer.transform(features);
    switch (kind) {
    case ModelKind::Mlp: {
        const Eigen::MatrixXd xv =
            val_features.rows() > 0 ? out.standardizer.transform(val_features) : Eigen::MatrixXd(0, x.cols());
        out.model = train_mlp(x, labels, xv, val_labels, config.mlp, seed);
        break;
    }
    case ModelKind::RandomForest:
        out.model = RandomForest::fit(x, labels, config.forest, seed, config.workers);
        break;
    case ModelKind::GradientBoosting:
        out.model = GradientBoosting::fit(x, labels, config.boosting, config.workers);
        break;
    }
    return out;
}

Eigen::MatrixXd predict_scores(const TrainedModel& model, const Eigen::MatrixXd& features) {
    if (features.cols() != static_cast<Eigen::Index>(kNumFeatures)) {
        throw std::invalid_argument("predict_scores: expected 8 features");
    }
    const Eigen::MatrixXd x = model.standardizer.transform(features);
    return std::visit([&](const auto& m) -> Eigen::MatrixXd { return m.predict(x); }, model.model);
}

ScoreVector predict_scores(const TrainedModel& model, const FeatureVector& features) {
    Eigen::MatrixXd row(1, static_cast<Eigen::Index>(kNumFeatures));
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
        row(0, static_cast<Eigen::Index>(f)) = features[f];
    }
    const Eigen::MatrixXd s = predict_scores(model, row);
    ScoreVector out{};
    for (std::size_t k = 0; k < kNumWaveforms; ++k) {
        out[k] = s(0, static_cast<Eigen::Index>(k));
    }
    return out;
}

std::size_t argmax(const ScoreVector& scores) noexcept {
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[best]) {
            best = k;
        }
    }
    return best;
}

LabelVector predict_set(const ScoreVector& scores, double threshold) {
    LabelVector out{};
    bool any = false;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        out[k] = scores[k] >= threshold ? 1 : 0;
        any = any || out[k] != 0;
    }
    if (!any) {
        out[argmax(scores)] = 1;
    }
    return out;
}

std::string model_to_json(const TrainedModel& model) {
    json j;
    j["format"] = kFormatName;
    j["version"] = kFormatVersion;
    j["kind"] = to_string(model.kind);
    j["seed"] = model.seed;
    j["hyperparameters"] = config_json(model.config);
    j["standardizer"] = {{"mean", model.standardizer.mean()}, {"scale", model.standardizer.scale()}};
    j["feature_quantiles"] = {{"p10", feature_json(model.quantiles.p10)},
                              {"p50", feature_json(model.quantiles.p50)},
                              {"p90", feature_json(model.quantiles.p90)}};
    json params;
    if (const auto* mlp = std::get_if<Mlp>(&model.model)) {
        json layers = json::array();
        for (const auto& l : mlp->layers()) {
            layers.push_back({{"weight", matrix_json(l.weight)}, {"bias", vector_json(l.bias)}});
        }
        params["layers"] = std::move(layers);
    } else if (const auto* rf = std::get_if<RandomForest>(&model.model)) {
        params["thresholds"] = rf->bins().thresholds();
        params["forests"] = ensembles_json(rf->forests());
    } else if (const auto* gb = std::get_if<GradientBoosting>(&model.model)) {
        params["thresholds"] = gb->bins().thresholds();
        params["base"] = gb->base();
        params["ensembles"] = ensembles_json(gb->ensembles());
    }
    j["parameters"] = std::move(params);
    return j.dump();
}

TrainedModel model_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("model file: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kFormatName) {
            throw std::runtime_error("model file: not an isacwave model");
        }
        if (j.at("version").get<int>() != kFormatVersion) {
            throw std::runtime_error("model file: unsupported version");
        }
        TrainedModel m;
        const auto kind = parse_model_kind(j.at("kind").get<std::string>());
        if (!kind) {
            throw std::runtime_error("model file: unknown model kind");
        }
        m.kind = *kind;
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config = config_from(j.at("hyperparameters"));
        m.standardizer = Standardizer(j.at("standardizer").at("mean").get<std::vector<double>>(),
                                      j.at("standardizer").at("scale").get<std::vector<double>>());
        const json& q = j.at("feature_quantiles");
        m.quantiles = {feature_from(q.at("p10")), feature_from(q.at("p50")), feature_from(q.at("p90"))};
        const json& p = j.at("parameters");
        switch (m.kind) {
        case ModelKind::Mlp: {
            std::array<Mlp::Layer, 3> layers;
            if (p.at("layers").size() != layers.size()) {
                throw std::runtime_error("model file: expected 3 MLP layers");
            }
            for (std::size_t i = 0; i < layers.size(); ++i) {
                layers[i].weight = matrix_from(p.at("layers").at(i).at("weight"));
                layers[i].bias = vector_from(p.at("layers").at(i).at("bias"));
            }
            m.model = Mlp(std::move(layers));
            break;
        }
        case ModelKind::RandomForest:
            m.model = RandomForest(BinMapper(p.at("thresholds").get<std::vector<std::vector<double>>>()),
                                   ensembles_from(p.at("forests")));
            break;
        case ModelKind::GradientBoosting:
            m.model = GradientBoosting(BinMapper(p.at("thresholds").get<std::vector<std::vector<double>>>()),
                                       p.at("base").get<std::vector<double>>(), ensembles_from(p.at("ensembles")));
            break;
        }
        if (m.standardizer.dimension() != kNumFeatures) {
            throw std::runtime_error("model file: standardizer dimension is not 8");
        }
        return m;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("model file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("model file: ") + e.what());
    }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write model file " + path.string());
    }
    out << model_to_json(model) << '\n';
    if (!out) {
        throw std::runtime_error("failed writing model file " + path.string());
    }
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read model file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

} // namespace isacwave

#include "isacwave/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace isacwave {

namespace {

double f1(std::size_t tp, std::size_t fp, std::size_t fn) {
    const std::size_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 1.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

std::size_t utility_argmax(const std::array<ObjectiveVector, kNumWaveforms>& objectives) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < kNumWaveforms; ++k) {
        if (utility(objectives[k]) > utility(objectives[best])) {
            best = k;
        }
    }
    return best;
}

} // namespace

ClassificationMetrics classification_metrics(std::span<const LabelVector> truth, std::span<const LabelVector> predicted) {
    if (truth.size() != predicted.size()) {
        throw std::invalid_argument("classification_metrics: row count mismatch");
    }
    if (truth.empty()) {
        throw std::invalid_argument("classification_metrics: no rows");
    }
    std::array<std::size_t, kNumWaveforms> tp{};
    std::array<std::size_t, kNumWaveforms> fp{};
    std::array<std::size_t, kNumWaveforms> fn{};
    std::size_t exact = 0;
    std::size_t mismatched_bits = 0;
    for (std::size_t r = 0; r < truth.size(); ++r) {
        std::size_t row_mismatch = 0;
        for (std::size_t k = 0; k < kNumWaveforms; ++k) {
            const bool t = truth[r][k] != 0;
            const bool p = predicted[r][k] != 0;
            tp[k] += (t && p) ? 1 : 0;
            fp[k] += (!t && p) ? 1 : 0;
            fn[k] += (t && !p) ? 1 : 0;
            row_mismatch += t != p ? 1 : 0;
        }
        exact += row_mismatch == 0 ? 1 : 0;
        mismatched_bits += row_mismatch;
    }
    ClassificationMetrics m;
    const auto sum = [](const auto& a) { return std::accumulate(a.begin(), a.end(), std::size_t{0}); };
    const std::size_t all_tp = sum(tp);
    const std::size_t all_fp = sum(fp);
    const std::size_t all_fn = sum(fn);
    m.micro_f1 = all_tp + all_fp + all_fn == 0 ? 1.0 : f1(all_tp, all_fp, all_fn);
    double macro = 0.0;
    for (std::size_t k = 0; k < kNumWaveforms; ++k) {
        macro += f1(tp[k], fp[k], fn[k]);
    }
    m.macro_f1 = macro / static_cast<double>(kNumWaveforms);
    const auto n = static_cast<double>(truth.size());
    m.exact_match = static_cast<double>(exact) / n;
    m.hamming_loss = static_cast<double>(mismatched_bits) / (n * static_cast<double>(kNumWaveforms));
    return m;
}

double top1_inclusion(std::span<const ScoreVector> scores, std::span<const LabelVector> truth) {
    if (scores.size() != truth.size()) {
        throw std::invalid_argument("top1_inclusion: row count mismatch");
    }
    if (scores.empty()) {
        throw std::invalid_argument("top1_inclusion: no rows");
    }
    std::size_t hits = 0;
    for (std::size_t r = 0; r < scores.size(); ++r) {
        hits += truth[r][argmax(scores[r])] != 0 ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double utility(const ObjectiveVector& v) noexcept { return v[0] + v[1] + v[2]; }

double regret(const std::array<ObjectiveVector, kNumWaveforms>& objectives, std::size_t pick) {
    if (pick >= kNumWaveforms) {
        throw std::out_of_range("regret: pick out of range");
    }
    const double best = utility(objectives[utility_argmax(objectives)]);
    if (best <= 0.0) {
        return 0.0;
    }
    return std::max(0.0, (best - utility(objectives[pick])) / best);
}

double utility_regret(std::span<const std::size_t> picks,
                      std::span<const std::array<ObjectiveVector, kNumWaveforms>> objectives) {
    if (picks.size() != objectives.size()) {
        throw std::invalid_argument("utility_regret: row count mismatch");
    }
    if (picks.empty()) {
        throw std::invalid_argument("utility_regret: no rows");
    }
    double acc = 0.0;
    for (std::size_t r = 0; r < picks.size(); ++r) {
        acc += regret(objectives[r], picks[r]);
    }
    return acc / static_cast<double>(picks.size());
}

double uniform_random_regret(std::span<const std::array<ObjectiveVector, kNumWaveforms>> objectives) {
    if (objectives.empty()) {
        throw std::invalid_argument("uniform_random_regret: no rows");
    }
    double acc = 0.0;
    for (const auto& o : objectives) {
        for (std::size_t k = 0; k < kNumWaveforms; ++k) {
            acc += regret(o, k);
        }
    }
    return acc / static_cast<double>(objectives.size() * kNumWaveforms);
}

EvalReport evaluate_scores(std::string model, std::string split, std::span<const LabeledSample> samples,
                           std::span<const std::size_t> rows, std::span<const ScoreVector> scores, double threshold) {
    if (rows.size() != scores.size()) {
        throw std::invalid_argument("evaluate_scores: row count mismatch");
    }
    std::vector<LabelVector> truth;
    std::vector<LabelVector> predicted;
    std::vector<std::size_t> picks;
    std::vector<std::array<ObjectiveVector, kNumWaveforms>> objectives;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& s = samples[rows[r]];
        truth.push_back(s.labels);
        predicted.push_back(predict_set(scores[r], threshold));
        picks.push_back(argmax(scores[r]));
        objectives.push_back(s.objectives);
    }
    EvalReport rep;
    rep.model = std::move(model);
    rep.split = std::move(split);
    rep.samples = rows.size();
    rep.classification = classification_metrics(truth, predicted);
    rep.top1_inclusion = top1_inclusion(scores, truth);
    rep.utility_regret = utility_regret(picks, objectives);
    rep.random_regret = uniform_random_regret(objectives);
    return rep;
}

std::vector<ScoreVector> oracle_scores(std::span<const LabeledSample> samples, std::span<const std::size_t> rows) {
    std::vector<ScoreVector> out;
    out.reserve(rows.size());
    for (const std::size_t r : rows) {
        const auto& s = samples[r];
        ScoreVector v{};
        for (std::size_t k = 0; k < kNumWaveforms; ++k) {
            v[k] = s.labels[k] != 0 ? 0.75 : 0.0;
        }
        v[utility_argmax(s.objectives)] = 1.0;
        out.push_back(v);
    }
    return out;
}

std::vector<ScoreVector> prior_scores(std::span<const LabeledSample> samples, std::span<const std::size_t> reference,
                                      std::size_t count) {
    std::vector<LabeledSample> ref;
    ref.reserve(reference.size());
    for (const std::size_t r : reference) {
        ref.push_back(samples[r]);
    }
    const auto ratios = inclusion_ratios(ref);
    ScoreVector v{};
    std::copy(ratios.begin(), ratios.end(), v.begin());
    return std::vector<ScoreVector>(count, v);
}

std::vector<ScoreVector> model_scores(const TrainedModel& model, std::span<const LabeledSample> samples,
                                      std::span<const std::size_t> rows) {
    const Eigen::MatrixXd s = predict_scores(model, feature_matrix(samples, rows));
    std::vector<ScoreVector> out(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t k = 0; k < kNumWaveforms; ++k) {
            out[r][k] = s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
        }
    }
    return out;
}

std::string reports_to_json(std::span<const EvalReport> reports) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        arr.push_back({{"model", r.model},
                       {"split", r.split},
                       {"samples", r.samples},
                       {"micro_f1", r.classification.micro_f1},
                       {"macro_f1", r.classification.macro_f1},
                       {"exact_match", r.classification.exact_match},
                       {"hamming_loss", r.classification.hamming_loss},
                       {"top1_inclusion", r.top1_inclusion},
                       {"mean_utility_regret", r.utility_regret},
                       {"random_utility_regret", r.random_regret}});
    }
    return nlohmann::ordered_json{{"reports", arr}}.dump(2) + "\n";
}

std::vector<EvalReport> reports_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        std::vector<EvalReport> out;
        for (const auto& r : j.at("reports")) {
            EvalReport e;
            e.model = r.at("model").get<std::string>();
            e.split = r.at("split").get<std::string>();
            e.samples = r.at("samples").get<std::size_t>();
            e.classification.micro_f1 = r.at("micro_f1").get<double>();
            e.classification.macro_f1 = r.at("macro_f1").get<double>();
            e.classification.exact_match = r.at("exact_match").get<double>();
            e.classification.hamming_loss = r.at("hamming_loss").get<double>();
            e.top1_inclusion = r.at("top1_inclusion").get<double>();
            e.utility_regret = r.at("mean_utility_regret").get<double>();
            e.random_regret = r.at("random_utility_regret").get<double>();
            out.push_back(std::move(e));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("report: ") + e.what());
    }
}

std::string reports_to_table(std::span<const EvalReport> reports) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %-10s %8s %8s %8s %8s %8s %8s\n", "model", "split", "microF1", "macroF1",
                  "exact", "hamming", "top1", "regret");
    out += line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-10s %-10s %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f\n", r.model.c_str(),
                      r.split.c_str(), r.classification.micro_f1, r.classification.macro_f1,
                      r.classification.exact_match, r.classification.hamming_loss, r.top1_inclusion,
                      r.utility_regret);
        out += line;
    }
    return out;
}

} // namespace isacwave

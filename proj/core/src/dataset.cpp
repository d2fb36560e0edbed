#include "isacwave/dataset.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "isacwave/parallel.hpp"
#include "isacwave/pareto.hpp"
#include "isacwave/rng.hpp"

namespace isacwave {

namespace {

using nlohmann::json;

void append_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        throw std::runtime_error("dataset: refusing to write a non-finite value");
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

template <class Range>
void append_numbers(std::string& out, const Range& values) {
    out += '[';
    bool first = true;
    for (const double v : values) {
        if (!first) {
            out += ',';
        }
        first = false;
        append_number(out, v);
    }
    out += ']';
}

template <std::size_t N>
std::array<double, N> fixed_array(const json& j, const char* field) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != N) {
        throw std::runtime_error(std::string("dataset: field '") + field + "' has the wrong length");
    }
    std::array<double, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

} // namespace

std::size_t LabeledSample::popcount() const noexcept {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

LabelVector label_objectives(std::span<const ObjectiveVector> objectives, double epsilon, std::size_t* strict_size) {
    if (objectives.size() != kNumWaveforms) {
        throw std::invalid_argument("label_objectives: expected one objective vector per waveform");
    }
    const auto strict = pareto_set(objectives);
    const auto kept = epsilon_filter(objectives, strict, epsilon);
    const LabelBits bits = encode_labels(kept, kNumWaveforms);
    LabelVector out{};
    std::copy(bits.begin(), bits.end(), out.begin());
    if (strict_size != nullptr) {
        *strict_size = strict.size();
    }
    return out;
}

LabeledSample label_scenario(const Scenario& scenario, const Config& config) {
    LabeledSample s;
    s.id = scenario.id;
    s.seed = scenario.seed;
    s.features = build_feature_vector(scenario);
    for (const auto id : kAllWaveforms) {
        s.metrics[index_of(id)] = to_row(measure_all(id, scenario, config.waveform, config.metrics));
    }
    const auto vectors = objective_vectors(s.metrics, config.objectives, scenario.mix);
    std::copy(vectors.begin(), vectors.end(), s.objectives.begin());
    s.labels = label_objectives(s.objectives, config.epsilon, &s.strict_size);
    s.pareto_size = s.popcount();
    return s;
}

std::vector<LabeledSample> generate_samples(const Config& config, std::size_t n, std::uint64_t master_seed,
                                            std::size_t workers) {
    config.validate();
    std::vector<LabeledSample> out(n);
    parallel_for(n, workers, [&](std::size_t i) {
        const Scenario scenario =
            sample_scenario(config.scenario, derive_seed(master_seed, i, Stream::Scenario), i);
        out[i] = label_scenario(scenario, config);
    });
    return out;
}

std::array<double, kNumWaveforms> inclusion_ratios(std::span<const LabeledSample> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("inclusion_ratios: empty dataset");
    }
    std::array<std::size_t, kNumWaveforms> counts{};
    for (const auto& s : samples) {
        for (std::size_t k = 0; k < kNumWaveforms; ++k) {
            counts[k] += s.labels[k];
        }
    }
    std::array<double, kNumWaveforms> out{};
    for (std::size_t k = 0; k < kNumWaveforms; ++k) {
        out[k] = static_cast<double>(counts[k]) / static_cast<double>(samples.size());
    }
    return out;
}

DatasetSummary summarize(std::span<const LabeledSample> samples) {
    DatasetSummary d;
    d.inclusion = inclusion_ratios(samples);
    std::vector<std::size_t> sizes;
    sizes.reserve(samples.size());
    for (const auto& s : samples) {
        sizes.push_back(s.popcount());
    }
    std::sort(sizes.begin(), sizes.end());
    d.mean_pareto_size = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0})) /
                         static_cast<double>(sizes.size());
    const std::size_t mid = sizes.size() / 2;
    d.median_pareto_size = sizes.size() % 2 == 1 ? static_cast<double>(sizes[mid])
                                                 : 0.5 * static_cast<double>(sizes[mid - 1] + sizes[mid]);
    d.min_pareto_size = sizes.front();
    d.max_pareto_size = sizes.back();
    return d;
}

std::size_t audit_labels(std::span<const LabeledSample> samples, double epsilon) {
    std::size_t mismatches = 0;
    for (const auto& s : samples) {
        if (label_objectives(s.objectives, epsilon) != s.labels) {
            ++mismatches;
        }
    }
    return mismatches;
}

SplitSizes split_sizes(std::size_t n, const SplitFractions& fractions) {
    const auto train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions.train));
    const auto validation = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions.validation));
    if (train + validation > n) {
        throw std::invalid_argument("split_sizes: fractions exceed the dataset size");
    }
    return {train, validation, n - train - validation};
}

SplitIndices split_indices(std::size_t n, const SplitSizes& sizes, std::uint64_t seed) {
    if (sizes[0] + sizes[1] + sizes[2] != n) {
        throw std::invalid_argument("split_indices: split sizes do not sum to the dataset size");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0, Stream::Split));
    // Explicit Fisher-Yates so the permutation does not depend on the standard library.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    SplitIndices out;
    const auto b = order.begin();
    out.train.assign(b, b + static_cast<std::ptrdiff_t>(sizes[0]));
    out.validation.assign(b + static_cast<std::ptrdiff_t>(sizes[0]),
                          b + static_cast<std::ptrdiff_t>(sizes[0] + sizes[1]));
    out.test.assign(b + static_cast<std::ptrdiff_t>(sizes[0] + sizes[1]), order.end());
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Eigen::MatrixXd feature_matrix(std::span<const LabeledSample> samples, std::span<const std::size_t> rows) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kNumFeatures));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& f = samples[rows[r]].features;
        for (std::size_t c = 0; c < kNumFeatures; ++c) {
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f[c];
        }
    }
    return x;
}

Eigen::MatrixXd label_matrix(std::span<const LabeledSample> samples, std::span<const std::size_t> rows) {
    Eigen::MatrixXd y(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kNumWaveforms));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& l = samples[rows[r]].labels;
        for (std::size_t c = 0; c < kNumWaveforms; ++c) {
            y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = l[c];
        }
    }
    return y;
}

std::string sample_to_jsonl(const LabeledSample& s) {
    std::string out = "{\"id\":" + std::to_string(s.id) + ",\"seed\":" + std::to_string(s.seed) + ",\"features\":";
    append_numbers(out, s.features);
    out += ",\"objectives\":[";
    for (std::size_t k = 0; k < kNumWaveforms; ++k) {
        out += k == 0 ? "" : ",";
        append_numbers(out, s.objectives[k]);
    }
    out += "],\"labels\":[";
    for (std::size_t k = 0; k < kNumWaveforms; ++k) {
        out += k == 0 ? "" : ",";
        out += s.labels[k] != 0 ? '1' : '0';
    }
    out += "],\"pareto_size\":" + std::to_string(s.pareto_size) + ",\"strict_size\":" + std::to_string(s.strict_size);
    out += ",\"metrics\":[";
    for (std::size_t k = 0; k < kNumWaveforms; ++k) {
        out += k == 0 ? "" : ",";
        append_numbers(out, s.metrics[k]);
    }
    out += "]}";
    return out;
}

LabeledSample sample_from_jsonl(std::string_view line) {
    try {
        const json j = json::parse(line);
        LabeledSample s;
        s.id = j.at("id").get<std::uint64_t>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.features = fixed_array<kNumFeatures>(j.at("features"), "features");
        const json& obj = j.at("objectives");
        const json& met = j.at("metrics");
        const json& lab = j.at("labels");
        if (obj.size() != kNumWaveforms || met.size() != kNumWaveforms || lab.size() != kNumWaveforms) {
            throw std::runtime_error("dataset: expected one entry per waveform");
        }
        for (std::size_t k = 0; k < kNumWaveforms; ++k) {
            s.objectives[k] = fixed_array<3>(obj[k], "objectives");
            s.metrics[k] = fixed_array<kNumMetrics>(met[k], "metrics");
            const int bit = lab[k].get<int>();
            if (bit != 0 && bit != 1) {
                throw std::runtime_error("dataset: labels must be 0 or 1");
            }
            s.labels[k] = static_cast<std::uint8_t>(bit);
        }
        s.pareto_size = j.at("pareto_size").get<std::size_t>();
        s.strict_size = j.at("strict_size").get<std::size_t>();
        for (const double f : s.features) {
            if (!std::isfinite(f)) {
                throw std::runtime_error("dataset: non-finite feature");
            }
        }
        return s;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("dataset: malformed line: ") + e.what());
    }
}

std::string manifest_to_json(const DatasetManifest& m) {
    nlohmann::ordered_json j;
    j["format"] = "isacwave-dataset";
    j["version"] = 1;
    j["samples"] = m.samples;
    j["split"] = {{"train", m.split[0]}, {"validation", m.split[1]}, {"test", m.split[2]}};
    j["config_hash"] = hex64(m.config_hash);
    j["master_seed"] = m.master_seed;
    j["legend"] = m.legend;
    j["features"] = {"rho_s", "rho_c", "rho_sc", "snr_db", "delay_spread_s", "doppler_spread_hz", "bandwidth_hz",
                     "mobility_mps"};
    j["summary"] = {{"mean_pareto_size", m.summary.mean_pareto_size},
                    {"median_pareto_size", m.summary.median_pareto_size},
                    {"min_pareto_size", m.summary.min_pareto_size},
                    {"max_pareto_size", m.summary.max_pareto_size},
                    {"inclusion_ratios", m.summary.inclusion}};
    return j.dump(2) + "\n";
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read manifest " + path.string());
    }
    try {
        const json j = json::parse(in);
        DatasetManifest m;
        m.samples = j.at("samples").get<std::size_t>();
        m.split = {j.at("split").at("train").get<std::size_t>(), j.at("split").at("validation").get<std::size_t>(),
                   j.at("split").at("test").get<std::size_t>()};
        if (m.split[0] + m.split[1] + m.split[2] != m.samples) {
            throw std::runtime_error("manifest: split sizes do not sum to the sample count");
        }
        m.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        const auto legend = j.at("legend").get<std::vector<std::string>>();
        if (legend.size() != kNumWaveforms) {
            throw std::runtime_error("manifest: legend must list 5 waveforms");
        }
        std::copy(legend.begin(), legend.end(), m.legend.begin());
        const json& s = j.at("summary");
        m.summary.mean_pareto_size = s.at("mean_pareto_size").get<double>();
        m.summary.median_pareto_size = s.at("median_pareto_size").get<double>();
        m.summary.min_pareto_size = s.at("min_pareto_size").get<std::size_t>();
        m.summary.max_pareto_size = s.at("max_pareto_size").get<std::size_t>();
        m.summary.inclusion = fixed_array<kNumWaveforms>(s.at("inclusion_ratios"), "inclusion_ratios");
        return m;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("manifest: ") + e.what());
    }
}

void write_dataset(const std::filesystem::path& dir, std::span<const LabeledSample> samples,
                   const DatasetManifest& manifest) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / kDatasetFile, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + (dir / kDatasetFile).string());
        }
        for (const auto& s : samples) {
            out << sample_to_jsonl(s) << '\n';
        }
        if (!out) {
            throw std::runtime_error("failed writing " + (dir / kDatasetFile).string());
        }
    }
    std::ofstream out(dir / kManifestFile, std::ios::binary);
    out << manifest_to_json(manifest);
    if (!out) {
        throw std::runtime_error("failed writing " + (dir / kManifestFile).string());
    }
}

std::vector<LabeledSample> read_dataset(const std::filesystem::path& path) {
    const std::filesystem::path file = std::filesystem::is_directory(path) ? path / kDatasetFile : path;
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read dataset " + file.string());
    }
    std::vector<LabeledSample> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            out.push_back(sample_from_jsonl(line));
        }
    }
    return out;
}

} // namespace isacwave

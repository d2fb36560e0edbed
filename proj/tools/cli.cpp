#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "isacwave/config.hpp"
#include "isacwave/dataset.hpp"
#include "isacwave/errors.hpp"
#include "isacwave/evaluate.hpp"
#include "isacwave/learn.hpp"
#include "isacwave/maps.hpp"

namespace isacwave::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> workers;
};

struct Options {
    Common common;
    std::optional<std::size_t> n;
    std::optional<double> epsilon;
    std::optional<double> threshold;
    std::string data;
    std::string model = "mlp";
    std::string model_file;
    std::string split = "test";
    std::optional<std::size_t> resolution;
    std::vector<std::string> regimes;
};

constexpr std::string_view kResolvedConfig = "resolved_config.json";

void add_common(CLI::App& cmd, Common& c) {
    cmd.add_option("--config", c.config, "JSON configuration file merged over the defaults");
    cmd.add_option("--seed", c.seed, "Master seed");
    cmd.add_option("--out", c.out, "Output directory (default: $ISACWAVE_OUT or ./out)");
    cmd.add_option("--workers", c.workers, "Worker threads; 0 uses every core");
}

fs::path output_dir(const Common& c) {
    if (!c.out.empty()) {
        return c.out;
    }
    if (const char* env = std::getenv("ISACWAVE_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return "out";
}

Config resolve(const Options& o) {
    Config cfg = o.common.config.empty() ? Config{} : load_config(o.common.config);
    if (o.common.seed) {
        cfg.seed = *o.common.seed;
    }
    if (o.common.workers) {
        cfg.workers = *o.common.workers;
    }
    if (o.n) {
        cfg.samples = *o.n;
    }
    if (o.epsilon) {
        cfg.epsilon = *o.epsilon;
    }
    if (o.threshold) {
        cfg.learn.threshold = *o.threshold;
    }
    if (o.resolution) {
        cfg.maps.resolution = *o.resolution;
    }
    cfg.validate();
    cfg.learn.workers = cfg.resolved_workers();
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_resolved(const fs::path& dir, const Config& cfg) { write_text(dir / kResolvedConfig, config_to_json(cfg)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string ratio_line(const std::array<double, kNumWaveforms>& r) {
    std::ostringstream s;
    s.precision(4);
    for (const auto id : kAllWaveforms) {
        s << ' ' << to_string(id) << '=' << std::fixed << r[index_of(id)];
    }
    return s.str();
}

fs::path data_dir(const Options& o) { return o.data.empty() ? output_dir(o.common) : fs::path(o.data); }

struct LoadedData {
    std::vector<LabeledSample> samples;
    DatasetManifest manifest;
    SplitIndices split;
};

LoadedData load_data(const Options& o) {
    const fs::path dir = data_dir(o);
    LoadedData d;
    d.manifest = read_manifest(dir / kManifestFile);
    d.samples = read_dataset(dir / kDatasetFile);
    if (d.samples.size() != d.manifest.samples) {
        throw std::runtime_error("dataset row count does not match its manifest");
    }
    d.split = split_indices(d.samples.size(), d.manifest.split, d.manifest.master_seed);
    return d;
}

const std::vector<std::size_t>& split_rows(const LoadedData& d, const std::string& name) {
    if (name == "train") {
        return d.split.train;
    }
    if (name == "validation") {
        return d.split.validation;
    }
    if (name == "test") {
        return d.split.test;
    }
    throw UsageError("--split must be train, validation or test");
}

ModelKind parse_kind(const std::string& name) {
    const auto kind = parse_model_kind(name);
    if (!kind) {
        throw UsageError("--model must be mlp, rf or gbt (got '" + name + "')");
    }
    return *kind;
}

fs::path model_path(const fs::path& dir, ModelKind kind) {
    return dir / ("model_" + std::string(to_string(kind)) + ".json");
}

TrainedModel load_selected_model(const Options& o) {
    if (!o.model_file.empty()) {
        return load_model(o.model_file);
    }
    return load_model(model_path(output_dir(o.common), parse_kind(o.model)));
}

int cmd_generate(const Options& o, std::ostream& out) {
    const Config cfg = resolve(o);
    const fs::path dir = output_dir(o.common);
    const auto t0 = std::chrono::steady_clock::now();
    const auto samples = generate_samples(cfg, cfg.samples, cfg.seed, cfg.resolved_workers());
    DatasetManifest m;
    m.samples = samples.size();
    m.split = split_sizes(samples.size(), cfg.split);
    m.config_hash = config_hash(cfg);
    m.master_seed = cfg.seed;
    for (const auto id : kAllWaveforms) {
        m.legend[index_of(id)] = std::string(to_string(id));
    }
    m.summary = summarize(samples);
    write_dataset(dir, samples, m);
    write_resolved(dir, cfg);
    out << "generated " << samples.size() << " samples in " << seconds_since(t0) << " s -> " << dir.string() << '\n';
    out << "pareto set size: mean " << m.summary.mean_pareto_size << ", median " << m.summary.median_pareto_size
        << ", min " << m.summary.min_pareto_size << ", max " << m.summary.max_pareto_size << '\n';
    out << "inclusion:" << ratio_line(m.summary.inclusion) << '\n';
    return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
    const Config cfg = resolve(o);
    const ModelKind kind = parse_kind(o.model);
    const fs::path dir = output_dir(o.common);
    const LoadedData d = load_data(o);
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::MatrixXd x = feature_matrix(d.samples, d.split.train);
    const Eigen::MatrixXd y = label_matrix(d.samples, d.split.train);
    const Eigen::MatrixXd xv = feature_matrix(d.samples, d.split.validation);
    const Eigen::MatrixXd yv = label_matrix(d.samples, d.split.validation);
    const TrainedModel model =
        fit(kind, x, y, xv, yv, cfg.learn, derive_seed(cfg.seed, static_cast<std::uint64_t>(kind), Stream::Training));
    fs::create_directories(dir);
    save_model(model, model_path(dir, kind));
    write_resolved(dir, cfg);
    out << "trained " << to_string(kind) << " on " << d.split.train.size() << " samples in " << seconds_since(t0)
        << " s -> " << model_path(dir, kind).string() << '\n';
    if (!d.split.validation.empty()) {
        const auto scores = model_scores(model, d.samples, d.split.validation);
        const std::vector<EvalReport> reports{evaluate_scores(std::string(to_string(kind)), "validation", d.samples,
                                                              d.split.validation, scores, cfg.learn.threshold)};
        const std::string stem = "train_" + std::string(to_string(kind)) + "_validation";
        write_text(dir / (stem + ".json"), reports_to_json(reports));
        write_text(dir / (stem + ".txt"), reports_to_table(reports));
        out << reports_to_table(reports);
    }
    return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
    const Config cfg = resolve(o);
    const fs::path dir = output_dir(o.common);
    const LoadedData d = load_data(o);
    const auto& rows = split_rows(d, o.split);
    if (rows.empty()) {
        throw UsageError("split '" + o.split + "' is empty");
    }
    std::vector<ScoreVector> scores;
    double threshold = cfg.learn.threshold;
    std::string name = o.model;
    if (o.model_file.empty() && o.model == "oracle") {
        scores = oracle_scores(d.samples, rows);
    } else if (o.model_file.empty() && o.model == "prior") {
        scores = prior_scores(d.samples, d.split.train, rows.size());
    } else {
        const TrainedModel model = load_selected_model(o);
        name = std::string(to_string(model.kind));
        if (!o.threshold) {
            threshold = model.config.threshold;
        }
        scores = model_scores(model, d.samples, rows);
    }
    const std::vector<EvalReport> reports{evaluate_scores(name, o.split, d.samples, rows, scores, threshold)};
    const std::string stem = "eval_" + name + "_" + o.split;
    write_text(dir / (stem + ".json"), reports_to_json(reports));
    write_text(dir / (stem + ".txt"), reports_to_table(reports));
    write_resolved(dir, cfg);
    out << reports_to_table(reports);
    out << "uniform-random regret on this split: " << reports.front().random_regret << '\n';
    return kExitOk;
}

int cmd_maps(const Options& o, std::ostream& out) {
    const Config cfg = resolve(o);
    const std::vector<std::string> regimes = o.regimes.empty() ? cfg.maps.regimes : o.regimes;
    const auto& known = regime_names();
    for (const auto& r : regimes) {
        if (std::find(known.begin(), known.end(), r) == known.end()) {
            throw UsageError("unknown regime '" + r + "'");
        }
    }
    const TrainedModel model = load_selected_model(o);
    const fs::path dir = output_dir(o.common) / "maps";
    std::size_t files = 0;
    for (const auto& r : regimes) {
        const SelectionMap map = selection_map(model, make_regime(r, model.quantiles), cfg.maps.resolution);
        files += render_map(map, dir).size();
        const auto counts = map.active_counts();
        out << r << ':';
        for (const auto id : kAllWaveforms) {
            out << ' ' << to_string(id) << '=' << counts[index_of(id)];
        }
        out << " (of " << map.grid.size() << " points)\n";
    }
    write_resolved(output_dir(o.common), cfg);
    out << "wrote " << files << " files -> " << dir.string() << '\n';
    return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
    const fs::path dir = output_dir(o.common);
    std::vector<fs::path> files;
    if (fs::is_directory(dir)) {
        for (const auto& e : fs::directory_iterator(dir)) {
            const std::string name = e.path().filename().string();
            if (name.rfind("eval_", 0) == 0 && e.path().extension() == ".json") {
                files.push_back(e.path());
            }
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<EvalReport> reports;
    for (const auto& f : files) {
        const auto r = reports_from_json(read_text(f));
        reports.insert(reports.end(), r.begin(), r.end());
    }
    std::string text;
    const fs::path manifest_file = data_dir(o) / kManifestFile;
    nlohmann::ordered_json j;
    if (fs::exists(manifest_file)) {
        const DatasetManifest m = read_manifest(manifest_file);
        std::ostringstream s;
        s << "dataset: " << m.samples << " samples (train " << m.split[0] << ", validation " << m.split[1]
          << ", test " << m.split[2] << ")\n"
          << "pareto set size: mean " << m.summary.mean_pareto_size << ", median " << m.summary.median_pareto_size
          << "\ninclusion:" << ratio_line(m.summary.inclusion) << "\n\n";
        text += s.str();
        j["dataset"] = nlohmann::ordered_json::parse(manifest_to_json(m));
    }
    text += reports_to_table(reports);
    j["evaluations"] = nlohmann::ordered_json::parse(reports_to_json(reports)).at("reports");
    write_text(dir / "report.json", j.dump(2) + "\n");
    write_text(dir / "report.txt", text);
    out << text;
    return kExitOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Demand-aware ISAC waveform selection: dataset generation, training and maps", "isacwave"};
    app.require_subcommand(1);
    Options o;

    auto* gen = app.add_subcommand("generate", "Simulate scenarios and write a labelled dataset");
    add_common(*gen, o.common);
    gen->add_option("--n", o.n, "Number of scenarios");
    gen->add_option("--epsilon", o.epsilon, "Epsilon-Pareto tolerance");

    auto* train = app.add_subcommand("train", "Fit a multi-label model on the training split");
    add_common(*train, o.common);
    train->add_option("--data", o.data, "Dataset directory (default: output directory)");
    train->add_option("--model", o.model, "Model kind: mlp, rf or gbt");
    train->add_option("--threshold", o.threshold, "Decision threshold stored with the model");

    auto* eval = app.add_subcommand("eval", "Evaluate a model or baseline on one split");
    add_common(*eval, o.common);
    eval->add_option("--data", o.data, "Dataset directory (default: output directory)");
    eval->add_option("--model", o.model, "mlp, rf, gbt, or the baselines oracle and prior");
    eval->add_option("--model-file", o.model_file, "Explicit model file");
    eval->add_option("--split", o.split, "train, validation or test");
    eval->add_option("--threshold", o.threshold, "Override the model's decision threshold");

    auto* maps = app.add_subcommand("maps", "Render demand-aware selection maps");
    add_common(*maps, o.common);
    maps->add_option("--model", o.model, "Model kind: mlp, rf or gbt");
    maps->add_option("--model-file", o.model_file, "Explicit model file");
    maps->add_option("--resolution", o.resolution, "Simplex grid resolution");
    maps->add_option("--regime", o.regimes, "Regime name (repeatable)");

    auto* report = app.add_subcommand("report", "Collect evaluation results into one report");
    add_common(*report, o.common);
    report->add_option("--data", o.data, "Dataset directory (default: output directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) {
            return cmd_generate(o, out);
        }
        if (*train) {
            return cmd_train(o, out);
        }
        if (*eval) {
            return cmd_eval(o, out);
        }
        if (*maps) {
            return cmd_maps(o, out);
        }
        return cmd_report(o, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace isacwave::cli

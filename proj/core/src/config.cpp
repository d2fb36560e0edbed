#include "isacwave/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "isacwave/errors.hpp"
#include "isacwave/parallel.hpp"

namespace isacwave {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string_view pulse_name(PulseShape p) { return p == PulseShape::RootRaisedCosine ? "rrc" : "rect"; }

ordered range_json(const Range& r) { return ordered{{"min", r.min}, {"max", r.max}}; }

ordered to_tree(const Config& c) {
    const auto& s = c.scenario;
    ordered mobility = ordered::array();
    for (const auto& r : s.mobility_classes) {
        mobility.push_back(ordered::array({r.min, r.max}));
    }
    const auto& w = c.waveform;
    const auto& m = c.metrics;
    const auto& l = c.learn;
    return ordered{
        {"seed", c.seed},
        {"samples", c.samples},
        {"epsilon", c.epsilon},
        {"workers", c.workers},
        {"split", {{"train", c.split.train}, {"validation", c.split.validation}, {"test", c.split.test}}},
        {"scenario",
         {{"snr_db", range_json(s.snr_db)},
          {"user_snr_spread_db", s.user_snr_spread_db},
          {"delay_spread_s", range_json(s.delay_spread_s)},
          {"min_paths", s.min_paths},
          {"max_paths", s.max_paths},
          {"mobility_classes", mobility},
          {"bandwidths_hz", s.bandwidths_hz},
          {"min_users", s.min_users},
          {"max_users", s.max_users},
          {"carrier_hz", s.carrier_hz},
          {"cell_radius_m", s.cell_radius_m},
          {"min_echoes", s.min_echoes},
          {"max_echoes", s.max_echoes},
          {"echo_window_samples", s.echo_window_samples},
          {"demand_enabled", s.demand_enabled}}},
        {"waveform",
         {{"subcarriers", w.subcarriers},
          {"cp_length", w.cp_length},
          {"otfs_delay_bins", w.otfs_delay_bins},
          {"otfs_doppler_bins", w.otfs_doppler_bins},
          {"fmcw_chirp_samples", w.fmcw_chirp_samples},
          {"fmcw_chirps_per_frame", w.fmcw_chirps_per_frame},
          {"modulation_order", w.modulation_order},
          {"sc_pulse", pulse_name(w.sc_pulse)},
          {"rrc_rolloff", w.rrc_rolloff},
          {"rrc_span_symbols", w.rrc_span_symbols},
          {"require_pow2", w.require_pow2}}},
        {"metrics",
         {{"comm_frames", m.comm_frames},
          {"sensing_frames", m.sensing_frames},
          {"papr_frames", m.papr_frames},
          {"oversampling", m.oversampling},
          {"overhead", m.overhead},
          {"latency_factor", m.latency_factor},
          {"tx_power_w", m.tx_power_w},
          {"backoff_per_db", m.backoff_per_db}}},
        {"objectives", {{"alpha", c.objectives.alpha}, {"beta", c.objectives.beta}, {"gamma", c.objectives.gamma}}},
        {"learn",
         {{"threshold", l.threshold},
          {"mlp",
           {{"hidden", l.mlp.hidden},
            {"learning_rate", l.mlp.learning_rate},
            {"batch_size", l.mlp.batch_size},
            {"max_epochs", l.mlp.max_epochs},
            {"patience", l.mlp.patience},
            {"beta1", l.mlp.beta1},
            {"beta2", l.mlp.beta2},
            {"adam_epsilon", l.mlp.adam_epsilon}}},
          {"forest",
           {{"trees", l.forest.trees},
            {"max_depth", l.forest.max_depth},
            {"features_per_split", l.forest.features_per_split},
            {"min_samples_split", l.forest.min_samples_split},
            {"max_bins", l.forest.max_bins}}},
          {"boosting",
           {{"rounds", l.boosting.rounds},
            {"max_depth", l.boosting.max_depth},
            {"learning_rate", l.boosting.learning_rate},
            {"l2", l.boosting.l2},
            {"min_child_hessian", l.boosting.min_child_hessian},
            {"max_bins", l.boosting.max_bins}}}}},
        {"maps", {{"resolution", c.maps.resolution}, {"regimes", c.maps.regimes}}},
    };
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

bool same_kind(const ordered& a, const json& b) {
    if (a.is_number()) {
        return b.is_number();
    }
    return a.type() == b.type();
}

// Objects merge key by key; every other value replaces the default.
void merge(ordered& base, const json& user, const std::string& path) {
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string field = join(path, it.key());
        if (!base.contains(it.key())) {
            throw ConfigError(field + ": unknown configuration key");
        }
        ordered& slot = base[it.key()];
        if (!same_kind(slot, it.value())) {
            throw ConfigError(field + ": expected " + std::string(slot.type_name()) + ", got " +
                              std::string(it.value().type_name()));
        }
        if (slot.is_object()) {
            merge(slot, it.value(), field);
        } else {
            slot = ordered::parse(it.value().dump());
        }
    }
}

class Reader {
public:
    explicit Reader(const ordered& root) : root_(root) {}

    const ordered& at(const std::string& path) const {
        const ordered* node = &root_;
        std::size_t begin = 0;
        while (begin <= path.size()) {
            const std::size_t dot = path.find('.', begin);
            const std::string key = path.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
            node = &node->at(key);
            if (dot == std::string::npos) {
                break;
            }
            begin = dot + 1;
        }
        return *node;
    }

    double real(const std::string& path) const {
        const ordered& v = at(path);
        if (!v.is_number()) {
            throw ConfigError(path + ": expected a number");
        }
        return v.get<double>();
    }

    std::uint64_t count(const std::string& path) const { return unsigned_value(at(path), path); }

    int integer(const std::string& path) const {
        const ordered& v = at(path);
        if (!v.is_number_integer()) {
            throw ConfigError(path + ": expected an integer");
        }
        return v.get<int>();
    }

    bool flag(const std::string& path) const {
        const ordered& v = at(path);
        if (!v.is_boolean()) {
            throw ConfigError(path + ": expected a boolean");
        }
        return v.get<bool>();
    }

    std::string text(const std::string& path) const {
        const ordered& v = at(path);
        if (!v.is_string()) {
            throw ConfigError(path + ": expected a string");
        }
        return v.get<std::string>();
    }

    Range range(const std::string& path) const {
        const ordered& v = at(path);
        if (!v.is_object() || v.size() != 2) {
            throw ConfigError(path + ": expected {min, max}");
        }
        return {real(path + ".min"), real(path + ".max")};
    }

    std::vector<double> reals(const std::string& path) const {
        const ordered& v = at(path);
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    template <std::size_t N>
    std::array<double, N> fixed(const std::string& path) const {
        const auto v = reals(path);
        if (v.size() != N) {
            throw ConfigError(path + ": expected " + std::to_string(N) + " entries");
        }
        std::array<double, N> out{};
        std::copy(v.begin(), v.end(), out.begin());
        return out;
    }

private:
    static std::uint64_t unsigned_value(const ordered& v, const std::string& path) {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            throw ConfigError(path + ": expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    const ordered& root_;
};

Config from_tree(const ordered& tree) {
    const Reader r(tree);
    Config c;
    c.seed = r.count("seed");
    c.samples = r.count("samples");
    c.epsilon = r.real("epsilon");
    c.workers = r.count("workers");
    c.split = {r.real("split.train"), r.real("split.validation"), r.real("split.test")};

    auto& s = c.scenario;
    s.snr_db = r.range("scenario.snr_db");
    s.user_snr_spread_db = r.real("scenario.user_snr_spread_db");
    s.delay_spread_s = r.range("scenario.delay_spread_s");
    s.min_paths = r.count("scenario.min_paths");
    s.max_paths = r.count("scenario.max_paths");
    s.mobility_classes.clear();
    const ordered& mob = r.at("scenario.mobility_classes");
    for (std::size_t i = 0; i < mob.size(); ++i) {
        const ordered& pair = mob[i];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
            throw ConfigError("scenario.mobility_classes[" + std::to_string(i) + "]: expected [min, max]");
        }
        s.mobility_classes.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    s.bandwidths_hz = r.reals("scenario.bandwidths_hz");
    s.min_users = r.count("scenario.min_users");
    s.max_users = r.count("scenario.max_users");
    s.carrier_hz = r.real("scenario.carrier_hz");
    s.cell_radius_m = r.real("scenario.cell_radius_m");
    s.min_echoes = r.count("scenario.min_echoes");
    s.max_echoes = r.count("scenario.max_echoes");
    s.echo_window_samples = r.real("scenario.echo_window_samples");
    const ordered& enabled = r.at("scenario.demand_enabled");
    if (enabled.size() != 3) {
        throw ConfigError("scenario.demand_enabled: expected 3 booleans");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        if (!enabled[i].is_boolean()) {
            throw ConfigError("scenario.demand_enabled[" + std::to_string(i) + "]: expected a boolean");
        }
        s.demand_enabled[i] = enabled[i].get<bool>();
    }

    auto& w = c.waveform;
    w.subcarriers = r.count("waveform.subcarriers");
    w.cp_length = r.count("waveform.cp_length");
    w.otfs_delay_bins = r.count("waveform.otfs_delay_bins");
    w.otfs_doppler_bins = r.count("waveform.otfs_doppler_bins");
    w.fmcw_chirp_samples = r.count("waveform.fmcw_chirp_samples");
    w.fmcw_chirps_per_frame = r.count("waveform.fmcw_chirps_per_frame");
    w.modulation_order = r.integer("waveform.modulation_order");
    const std::string pulse = r.text("waveform.sc_pulse");
    if (pulse == "rect") {
        w.sc_pulse = PulseShape::Rectangular;
    } else if (pulse == "rrc") {
        w.sc_pulse = PulseShape::RootRaisedCosine;
    } else {
        throw ConfigError("waveform.sc_pulse: expected \"rect\" or \"rrc\"");
    }
    w.rrc_rolloff = r.real("waveform.rrc_rolloff");
    w.rrc_span_symbols = r.count("waveform.rrc_span_symbols");
    w.require_pow2 = r.flag("waveform.require_pow2");

    auto& m = c.metrics;
    m.comm_frames = r.count("metrics.comm_frames");
    m.sensing_frames = r.count("metrics.sensing_frames");
    m.papr_frames = r.count("metrics.papr_frames");
    m.oversampling = r.count("metrics.oversampling");
    m.overhead = r.fixed<kNumWaveforms>("metrics.overhead");
    m.latency_factor = r.fixed<kNumWaveforms>("metrics.latency_factor");
    m.tx_power_w = r.real("metrics.tx_power_w");
    m.backoff_per_db = r.real("metrics.backoff_per_db");

    c.objectives.alpha = r.fixed<4>("objectives.alpha");
    c.objectives.beta = r.fixed<3>("objectives.beta");
    c.objectives.gamma = r.fixed<3>("objectives.gamma");

    auto& l = c.learn;
    l.threshold = r.real("learn.threshold");
    l.mlp.hidden = r.count("learn.mlp.hidden");
    l.mlp.learning_rate = r.real("learn.mlp.learning_rate");
    l.mlp.batch_size = r.count("learn.mlp.batch_size");
    l.mlp.max_epochs = r.count("learn.mlp.max_epochs");
    l.mlp.patience = r.count("learn.mlp.patience");
    l.mlp.beta1 = r.real("learn.mlp.beta1");
    l.mlp.beta2 = r.real("learn.mlp.beta2");
    l.mlp.adam_epsilon = r.real("learn.mlp.adam_epsilon");
    l.forest.trees = r.count("learn.forest.trees");
    l.forest.max_depth = r.count("learn.forest.max_depth");
    l.forest.features_per_split = r.count("learn.forest.features_per_split");
    l.forest.min_samples_split = r.count("learn.forest.min_samples_split");
    l.forest.max_bins = r.count("learn.forest.max_bins");
    l.boosting.rounds = r.count("learn.boosting.rounds");
    l.boosting.max_depth = r.count("learn.boosting.max_depth");
    l.boosting.learning_rate = r.real("learn.boosting.learning_rate");
    l.boosting.l2 = r.real("learn.boosting.l2");
    l.boosting.min_child_hessian = r.real("learn.boosting.min_child_hessian");
    l.boosting.max_bins = r.count("learn.boosting.max_bins");

    c.maps.resolution = r.count("maps.resolution");
    c.maps.regimes.clear();
    const ordered& regimes = r.at("maps.regimes");
    for (std::size_t i = 0; i < regimes.size(); ++i) {
        if (!regimes[i].is_string()) {
            throw ConfigError("maps.regimes[" + std::to_string(i) + "]: expected a string");
        }
        c.maps.regimes.push_back(regimes[i].get<std::string>());
    }
    return c;
}

} // namespace

void Config::validate() const {
    if (samples == 0) {
        throw ConfigError("samples must be positive");
    }
    if (!(epsilon >= 0.0)) {
        throw ConfigError("epsilon must be non-negative");
    }
    const double sum = split.train + split.validation + split.test;
    if (!(split.train > 0.0 && split.validation >= 0.0 && split.test >= 0.0) || std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split: fractions must be non-negative, train positive, and sum to 1");
    }
    scenario.validate();
    waveform.validate();
    metrics.validate();
    objectives.validate();
    learn.validate();
    if (maps.resolution == 0) {
        throw ConfigError("maps.resolution must be positive");
    }
}

std::size_t Config::resolved_workers() const noexcept { return workers == 0 ? default_workers() : workers; }

Config config_from_json(std::string_view text) {
    json user;
    try {
        user = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!user.is_object()) {
        throw ConfigError("config: top level must be a JSON object");
    }
    ordered tree = to_tree(Config{});
    merge(tree, user, "");
    Config c = from_tree(tree);
    c.validate();
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("config: cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

std::string config_to_json(const Config& config) { return to_tree(config).dump(2) + "\n"; }

std::uint64_t config_hash(const Config& config) {
    ordered tree = to_tree(config);
    tree.erase("workers");
    const std::string text = tree.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace isacwave

#include "isacwave/maps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace isacwave {

namespace {

constexpr double kPlot = 400.0;  // plot area side, px
constexpr double kMargin = 50.0;

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

// Piecewise-linear dark-blue -> teal -> yellow ramp for s in [0, 1].
std::string ramp(double s) {
    static constexpr std::array<std::array<double, 3>, 3> stops{{{68, 1, 84}, {33, 145, 140}, {253, 231, 37}}};
    s = std::clamp(s, 0.0, 1.0) * 2.0;
    const auto i = static_cast<std::size_t>(std::min(1.0, std::floor(s)));
    const double t = s - static_cast<double>(i);
    char buf[16];
    std::array<int, 3> rgb{};
    for (std::size_t c = 0; c < 3; ++c) {
        rgb[c] = static_cast<int>(std::lround(stops[i][c] + t * (stops[i + 1][c] - stops[i][c])));
    }
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

} // namespace

std::vector<GridPoint> simplex_grid(std::size_t resolution) {
    if (resolution == 0) {
        throw std::invalid_argument("simplex_grid: resolution must be positive");
    }
    std::vector<GridPoint> out;
    out.reserve((resolution + 1) * (resolution + 2) / 2);
    const auto r = static_cast<double>(resolution);
    for (std::size_t i = 0; i <= resolution; ++i) {
        for (std::size_t j = 0; i + j <= resolution; ++j) {
            out.push_back({static_cast<double>(i) / r, static_cast<double>(j) / r});
        }
    }
    return out;
}

const std::vector<std::string>& regime_names() {
    static const std::vector<std::string> names{"doppler-low", "doppler-high", "delay-low", "delay-high",
                                                "band-narrow", "band-wide",    "snr-low",   "snr-high"};
    return names;
}

RegimeSpec make_regime(const std::string& name, const FeatureQuantiles& q) {
    const auto mid = [&](Feature f) { return q.p50[static_cast<std::size_t>(f)]; };
    RegimeSpec r{name,
                 mid(Feature::GammaDb),
                 mid(Feature::DelaySpreadS),
                 mid(Feature::DopplerSpreadHz),
                 mid(Feature::BandwidthHz),
                 mid(Feature::MobilityMps)};
    const auto lo = [&](Feature f) { return q.p10[static_cast<std::size_t>(f)]; };
    const auto hi = [&](Feature f) { return q.p90[static_cast<std::size_t>(f)]; };
    if (name == "doppler-low") {
        r.doppler_spread_hz = lo(Feature::DopplerSpreadHz);
    } else if (name == "doppler-high") {
        r.doppler_spread_hz = hi(Feature::DopplerSpreadHz);
    } else if (name == "delay-low") {
        r.delay_spread_s = lo(Feature::DelaySpreadS);
    } else if (name == "delay-high") {
        r.delay_spread_s = hi(Feature::DelaySpreadS);
    } else if (name == "band-narrow") {
        r.bandwidth_hz = lo(Feature::BandwidthHz);
    } else if (name == "band-wide") {
        r.bandwidth_hz = hi(Feature::BandwidthHz);
    } else if (name == "snr-low") {
        r.snr_db = lo(Feature::GammaDb);
    } else if (name == "snr-high") {
        r.snr_db = hi(Feature::GammaDb);
    } else {
        throw std::invalid_argument("unknown regime '" + name + "'");
    }
    return r;
}

LabelVector top_two(const ScoreVector& scores) {
    std::array<std::size_t, kNumWaveforms> order{};
    for (std::size_t k = 0; k < kNumWaveforms; ++k) {
        order[k] = k;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    LabelVector out{};
    out[order[0]] = 1;
    out[order[1]] = 1;
    return out;
}

std::array<std::size_t, kNumWaveforms> SelectionMap::active_counts() const {
    std::array<std::size_t, kNumWaveforms> out{};
    for (const auto& a : active) {
        for (std::size_t k = 0; k < kNumWaveforms; ++k) {
            out[k] += a[k];
        }
    }
    return out;
}

FeatureVector regime_features(const RegimeSpec& regime, const GridPoint& p) {
    FeatureVector f{};
    f[static_cast<std::size_t>(Feature::RhoS)] = p.rho_s;
    f[static_cast<std::size_t>(Feature::RhoC)] = p.rho_c;
    f[static_cast<std::size_t>(Feature::RhoSC)] = std::max(0.0, 1.0 - p.rho_s - p.rho_c);
    f[static_cast<std::size_t>(Feature::GammaDb)] = regime.snr_db;
    f[static_cast<std::size_t>(Feature::DelaySpreadS)] = regime.delay_spread_s;
    f[static_cast<std::size_t>(Feature::DopplerSpreadHz)] = regime.doppler_spread_hz;
    f[static_cast<std::size_t>(Feature::BandwidthHz)] = regime.bandwidth_hz;
    f[static_cast<std::size_t>(Feature::MobilityMps)] = regime.mobility_mps;
    return f;
}

SelectionMap selection_map(const TrainedModel& model, const RegimeSpec& regime, std::size_t resolution) {
    if (model.standardizer.dimension() != kNumFeatures) {
        throw std::logic_error("selection_map: model is untrained");
    }
    SelectionMap map;
    map.regime = regime;
    map.resolution = resolution;
    map.grid = simplex_grid(resolution);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(map.grid.size()), static_cast<Eigen::Index>(kNumFeatures));
    for (std::size_t r = 0; r < map.grid.size(); ++r) {
        const FeatureVector f = regime_features(regime, map.grid[r]);
        for (std::size_t c = 0; c < kNumFeatures; ++c) {
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f[c];
        }
    }
    const Eigen::MatrixXd s = predict_scores(model, x);
    map.scores.resize(map.grid.size());
    map.active.resize(map.grid.size());
    for (std::size_t r = 0; r < map.grid.size(); ++r) {
        for (std::size_t k = 0; k < kNumWaveforms; ++k) {
            map.scores[r][k] = s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
        }
        map.active[r] = top_two(map.scores[r]);
    }
    return map;
}

std::string map_to_csv(const SelectionMap& map) {
    std::string out = "rho_s,rho_c";
    for (std::size_t k = 0; k < kNumWaveforms; ++k) {
        out += ",score_" + std::to_string(k);
    }
    for (std::size_t k = 0; k < kNumWaveforms; ++k) {
        out += ",active_" + std::to_string(k);
    }
    out += '\n';
    for (std::size_t r = 0; r < map.grid.size(); ++r) {
        out += fmt("%.17g", map.grid[r].rho_s) + "," + fmt("%.17g", map.grid[r].rho_c);
        for (const double s : map.scores[r]) {
            out += "," + fmt("%.17g", s);
        }
        for (const auto a : map.active[r]) {
            out += a != 0 ? ",1" : ",0";
        }
        out += '\n';
    }
    return out;
}

std::string map_to_svg(const SelectionMap& map, WaveformId id) {
    const std::size_t k = index_of(id);
    const double cell = kPlot / static_cast<double>(map.resolution + 1);
    const double size = kPlot + 2.0 * kMargin;
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", size) + "\" height=\"" +
           fmt("%.0f", size) + "\" viewBox=\"0 0 " + fmt("%.0f", size) + " " + fmt("%.0f", size) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"" + fmt("%.1f", kMargin) + "\" y=\"30\" font-family=\"sans-serif\" font-size=\"14\">" +
           std::string(to_string(id)) + " | " + map.regime.name + "</text>\n";
    for (std::size_t r = 0; r < map.grid.size(); ++r) {
        const auto& p = map.grid[r];
        const double x = kMargin + p.rho_s * static_cast<double>(map.resolution) * cell;
        const double y = kMargin + kPlot - (p.rho_c * static_cast<double>(map.resolution) + 1.0) * cell;
        out += "<rect x=\"" + fmt("%.3f", x) + "\" y=\"" + fmt("%.3f", y) + "\" width=\"" + fmt("%.3f", cell) +
               "\" height=\"" + fmt("%.3f", cell) + "\" fill=\"" + ramp(map.scores[r][k]) + "\" fill-opacity=\"" +
               (map.active[r][k] != 0 ? "1" : "0.25") + "\"/>\n";
    }
    const double x0 = kMargin;
    const double y0 = kMargin + kPlot;
    out += "<line x1=\"" + fmt("%.1f", x0) + "\" y1=\"" + fmt("%.1f", y0) + "\" x2=\"" + fmt("%.1f", x0 + kPlot) +
           "\" y2=\"" + fmt("%.1f", y0) + "\" stroke=\"#000\"/>\n";
    out += "<line x1=\"" + fmt("%.1f", x0) + "\" y1=\"" + fmt("%.1f", y0) + "\" x2=\"" + fmt("%.1f", x0) +
           "\" y2=\"" + fmt("%.1f", y0 - kPlot) + "\" stroke=\"#000\"/>\n";
    out += "<text x=\"" + fmt("%.1f", x0 + kPlot / 2.0) + "\" y=\"" + fmt("%.1f", y0 + 35.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">rho_s</text>\n";
    out += "<text x=\"15\" y=\"" + fmt("%.1f", y0 - kPlot / 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">rho_c</text>\n";
    out += "</svg>\n";
    return out;
}

std::vector<std::filesystem::path> render_map(const SelectionMap& map, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const auto write = [&](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        out << text;
        if (!out) {
            throw std::runtime_error("failed writing " + path.string());
        }
        written.push_back(path);
    };
    write(dir / ("map_" + map.regime.name + ".csv"), map_to_csv(map));
    for (const auto id : kAllWaveforms) {
        write(dir / ("map_" + map.regime.name + "_" + std::string(to_string(id)) + ".svg"), map_to_svg(map, id));
    }
    return written;
}

} // namespace isacwave

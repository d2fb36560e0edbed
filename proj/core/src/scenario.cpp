#include "isacwave/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "isacwave/errors.hpp"

namespace isacwave {

namespace {

void check_range(const Range& r, const char* name) {
    if (!std::isfinite(r.min) || !std::isfinite(r.max) || r.min > r.max) {
        throw ConfigError(std::string(name) + " must satisfy min <= max");
    }
}

double uniform(Rng& rng, double lo, double hi) {
    if (lo == hi) {
        return lo;
    }
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_count(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

PathSet sample_paths(Rng& rng, const ScenarioConfig& cfg, double target_rms_s, double speed_mps) {
    const std::size_t count = uniform_count(rng, cfg.min_paths, cfg.max_paths);
    std::exponential_distribution<double> unit_exp(1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    const double max_doppler = cfg.carrier_hz * speed_mps / kSpeedOfLight;

    PathSet set;
    set.paths.resize(count);
    for (std::size_t l = 0; l < count; ++l) {
        Path& p = set.paths[l];
        p.delay_s = l == 0 ? 0.0 : unit_exp(rng) * target_rms_s;
        const double power = std::exp(-p.delay_s / std::max(target_rms_s, 1e-15)) * unit_exp(rng);
        p.gain = std::polar(std::sqrt(std::max(power, 1e-300)), angle(rng));
        p.doppler_hz = max_doppler * std::cos(angle(rng));
    }
    double total = 0.0;
    for (const auto& p : set.paths) {
        total += std::norm(p.gain);
    }
    for (auto& p : set.paths) {
        p.gain /= std::sqrt(total);
    }
    const double rms = path_spread(set).rms_delay_s;
    if (rms > 0.0) {
        const double scale = target_rms_s / rms;
        for (auto& p : set.paths) {
            p.delay_s *= scale;
        }
    }
    return set;
}

} // namespace

bool DemandMix::valid(double tol) const noexcept {
    return rho_s >= 0.0 && rho_c >= 0.0 && rho_sc >= 0.0 && std::abs(rho_s + rho_c + rho_sc - 1.0) <= tol;
}

double CellDescriptors::gamma_db() const noexcept { return 10.0 * std::log10(gamma); }

void ScenarioConfig::validate() const {
    check_range(snr_db, "scenario.snr_db");
    check_range(delay_spread_s, "scenario.delay_spread_s");
    if (delay_spread_s.min <= 0.0) {
        throw ConfigError("scenario.delay_spread_s must be positive");
    }
    if (!(user_snr_spread_db >= 0.0)) {
        throw ConfigError("scenario.user_snr_spread_db must be non-negative");
    }
    if (min_paths == 0) {
        throw ConfigError("scenario.min_paths must be at least 1");
    }
    if (min_paths > max_paths) {
        throw ConfigError("scenario.max_paths must not be below scenario.min_paths");
    }
    if (mobility_classes.empty()) {
        throw ConfigError("scenario.mobility_classes must not be empty");
    }
    for (const auto& m : mobility_classes) {
        check_range(m, "scenario.mobility_classes");
        if (m.min < 0.0) {
            throw ConfigError("scenario.mobility_classes speeds must be non-negative");
        }
    }
    if (bandwidths_hz.empty()) {
        throw ConfigError("scenario.bandwidths_hz must not be empty");
    }
    for (double b : bandwidths_hz) {
        if (!(b > 0.0)) {
            throw ConfigError("scenario.bandwidths_hz must be positive");
        }
    }
    if (min_users == 0) {
        throw ConfigError("scenario.min_users must be at least 1");
    }
    if (min_users > max_users) {
        throw ConfigError("scenario.max_users must not be below scenario.min_users");
    }
    if (!(carrier_hz > 0.0)) {
        throw ConfigError("scenario.carrier_hz must be positive");
    }
    if (!(cell_radius_m >= 0.0)) {
        throw ConfigError("scenario.cell_radius_m must be non-negative");
    }
    if (min_echoes > max_echoes) {
        throw ConfigError("scenario.max_echoes must not be below scenario.min_echoes");
    }
    if (!(echo_window_samples > 0.0)) {
        throw ConfigError("scenario.echo_window_samples must be positive");
    }
    if (std::none_of(demand_enabled.begin(), demand_enabled.end(), [](bool b) { return b; })) {
        throw ConfigError("scenario.demand_enabled must enable at least one service");
    }
}

DemandMix sample_demand_mix(Rng& rng, const std::array<bool, 3>& enabled) {
    std::exponential_distribution<double> e(1.0);
    std::array<double, 3> w{};
    double sum = 0.0;
    while (!(sum > 0.0)) {
        sum = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            w[i] = enabled[i] ? e(rng) : 0.0;
            sum += w[i];
        }
    }
    DemandMix mix{w[0] / sum, w[1] / sum, 0.0};
    // Closing the sum on the last enabled component keeps it on the simplex exactly.
    if (enabled[2]) {
        mix.rho_sc = std::max(0.0, 1.0 - mix.rho_s - mix.rho_c);
    } else if (enabled[1]) {
        mix.rho_c = std::max(0.0, 1.0 - mix.rho_s);
    } else {
        mix.rho_s = 1.0;
    }
    return mix;
}

SpreadStats path_spread(const PathSet& set) {
    if (set.paths.empty()) {
        throw std::domain_error("path_spread: empty path set");
    }
    double total = 0.0;
    for (const auto& p : set.paths) {
        total += std::norm(p.gain);
    }
    if (!(total > 0.0)) {
        throw std::domain_error("path_spread: path set has zero power");
    }
    SpreadStats s;
    for (const auto& p : set.paths) {
        const double w = std::norm(p.gain) / total;
        s.mean_delay_s += w * p.delay_s;
        s.mean_doppler_hz += w * p.doppler_hz;
    }
    double vt = 0.0;
    double vn = 0.0;
    for (const auto& p : set.paths) {
        const double w = std::norm(p.gain) / total;
        vt += w * (p.delay_s - s.mean_delay_s) * (p.delay_s - s.mean_delay_s);
        vn += w * (p.doppler_hz - s.mean_doppler_hz) * (p.doppler_hz - s.mean_doppler_hz);
    }
    s.rms_delay_s = std::sqrt(std::max(vt, 0.0));
    s.rms_doppler_hz = std::sqrt(std::max(vn, 0.0));
    return s;
}

CellDescriptors derive_descriptors(std::span<const PathSet> path_sets, std::span<const double> snr_linear) {
    if (path_sets.empty() || path_sets.size() != snr_linear.size()) {
        throw std::domain_error("derive_descriptors: need one SNR per non-empty user list");
    }
    CellDescriptors cell{0.0, 0.0, 0.0};
    for (std::size_t u = 0; u < path_sets.size(); ++u) {
        const SpreadStats s = path_spread(path_sets[u]);
        cell.gamma += snr_linear[u];
        cell.tau_d_s += s.rms_delay_s;
        cell.nu_d_hz += s.rms_doppler_hz;
    }
    const double n = static_cast<double>(path_sets.size());
    cell.gamma /= n;
    cell.tau_d_s /= n;
    cell.nu_d_hz /= n;
    return cell;
}

ChannelDraw sample_channel(Rng& rng, const ScenarioConfig& cfg) {
    cfg.validate();
    ChannelDraw draw;
    draw.bandwidth_hz = cfg.bandwidths_hz[uniform_count(rng, 0, cfg.bandwidths_hz.size() - 1)];
    const std::size_t cls = uniform_count(rng, 0, cfg.mobility_classes.size() - 1);
    draw.mobility_class = static_cast<MobilityClass>(std::min<std::size_t>(cls, 2));
    const Range speed_range = cfg.mobility_classes[cls];
    const double speed = uniform(rng, speed_range.min, speed_range.max);
    const double snr_mean = uniform(rng, cfg.snr_db.min, cfg.snr_db.max);
    const double tau = std::exp(uniform(rng, std::log(cfg.delay_spread_s.min), std::log(cfg.delay_spread_s.max)));
    const std::size_t users = uniform_count(rng, cfg.min_users, cfg.max_users);

    std::normal_distribution<double> snr_jitter(0.0, cfg.user_snr_spread_db);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    draw.users.resize(users);
    std::vector<PathSet> sets;
    std::vector<double> snrs;
    sets.reserve(users);
    snrs.reserve(users);
    double speed_sum = 0.0;
    for (auto& u : draw.users) {
        const double r = cfg.cell_radius_m * std::sqrt(unit(rng));
        const double phi = 2.0 * kPi * unit(rng);
        u.position_m = {r * std::cos(phi), r * std::sin(phi)};
        u.speed_mps = std::clamp(speed * uniform(rng, 0.5, 1.5), speed_range.min, speed_range.max);
        const double jitter = cfg.user_snr_spread_db > 0.0 ? snr_jitter(rng) : 0.0;
        u.snr_db = std::clamp(snr_mean + jitter, cfg.snr_db.min, cfg.snr_db.max);
        const double target = std::clamp(tau * uniform(rng, 0.5, 1.5), cfg.delay_spread_s.min, cfg.delay_spread_s.max);
        u.channel = sample_paths(rng, cfg, target, u.speed_mps);
        sets.push_back(u.channel);
        snrs.push_back(std::pow(10.0, u.snr_db / 10.0));
        speed_sum += u.speed_mps;
    }
    draw.mobility_mps = speed_sum / static_cast<double>(users);
    draw.cell = derive_descriptors(sets, snrs);
    return draw;
}

Scenario sample_scenario(const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t id) {
    Rng rng(seed);
    Scenario sc;
    sc.id = id;
    sc.seed = seed;
    sc.carrier_hz = cfg.carrier_hz;
    sc.mix = sample_demand_mix(rng, cfg.demand_enabled);
    ChannelDraw draw = sample_channel(rng, cfg);
    sc.users = std::move(draw.users);
    sc.cell = draw.cell;
    sc.bandwidth_hz = draw.bandwidth_hz;
    sc.mobility_mps = draw.mobility_mps;
    sc.mobility_class = draw.mobility_class;

    const std::size_t q = uniform_count(rng, cfg.min_echoes, cfg.max_echoes);
    const double vmax = cfg.mobility_classes[static_cast<std::size_t>(sc.mobility_class)].max;
    const double window_s = cfg.echo_window_samples / sc.bandwidth_hz;
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    std::uniform_real_distribution<double> delay(0.0, window_s);
    for (std::size_t i = 0; i < q; ++i) {
        Echo e;
        const double re = gauss(rng);
        const double im = gauss(rng);
        e.coefficient = {re, im};
        e.delay_s = delay(rng);
        e.doppler_hz = 2.0 * uniform(rng, -vmax, vmax) * cfg.carrier_hz / kSpeedOfLight;
        sc.echoes.echoes.push_back(e);
    }
    return sc;
}

FeatureVector build_feature_vector(const Scenario& s) {
    return {s.mix.rho_s,  s.mix.rho_c,  s.mix.rho_sc,   s.cell.gamma_db(),
            s.cell.tau_d_s, s.cell.nu_d_hz, s.bandwidth_hz, s.mobility_mps};
}

ChannelRealization to_realization(const PathSet& set, double bandwidth_hz) {
    ChannelRealization r;
    r.sample_rate_hz = bandwidth_hz;
    r.paths.reserve(set.paths.size());
    for (const auto& p : set.paths) {
        r.paths.push_back({p.gain, p.delay_s * bandwidth_hz, p.doppler_hz});
    }
    return r;
}

} // namespace isacwave

#include "isacwave/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace isacwave {

namespace {

double sinc(double x) {
    if (std::abs(x) < 1e-12) {
        return 1.0;
    }
    return std::sin(kPi * x) / (kPi * x);
}

// Phase rotation e^{j2pi nu (t0+n)/fs}, advanced by recurrence and re-anchored
// periodically to keep rounding drift negligible.
class Rotator {
public:
    Rotator(double doppler_hz, double sample_rate_hz, double t0)
        : cycles_per_sample_(sample_rate_hz > 0.0 ? doppler_hz / sample_rate_hz : 0.0), t0_(t0) {
        step_ = std::polar(1.0, 2.0 * kPi * cycles_per_sample_);
        reanchor(0);
    }

    cplx at(std::size_t n) {
        if (n != next_) {
            reanchor(n);
        } else if ((n & 511U) == 0) {
            reanchor(n);
        }
        const cplx v = current_;
        current_ *= step_;
        ++next_;
        return v;
    }

private:
    void reanchor(std::size_t n) {
        const double phase = 2.0 * kPi * cycles_per_sample_ * (t0_ + static_cast<double>(n));
        current_ = std::polar(1.0, std::fmod(phase, 2.0 * kPi));
        next_ = n;
    }

    double cycles_per_sample_;
    double t0_;
    cplx step_;
    cplx current_;
    std::size_t next_ = 0;
};

void accumulate_path(std::span<const cplx> in, std::span<cplx> out, cplx gain, double delay,
                     double doppler_hz, double rate, double t0) {
    const FractionalDelay fd = fractional_delay(delay);
    const auto n = static_cast<std::ptrdiff_t>(in.size());
    const auto taps = static_cast<std::ptrdiff_t>(fd.taps.size());
    // Output samples whose whole interpolator support lies inside the input.
    const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(fd.first + taps - 1, 0, n);
    const std::ptrdiff_t hi = std::clamp<std::ptrdiff_t>(n + fd.first, lo, n);
    const auto filtered = [&](std::ptrdiff_t i) {
        cplx acc{};
        if (i >= lo && i < hi) {
            const cplx* src = in.data() + (i - fd.first);
            for (std::ptrdiff_t k = 0; k < taps; ++k) {
                acc += fd.taps[static_cast<std::size_t>(k)] * src[-k];
            }
            return acc;
        }
        for (std::ptrdiff_t k = 0; k < taps; ++k) {
            const std::ptrdiff_t src = i - fd.first - k;
            if (src >= 0 && src < n) {
                acc += fd.taps[static_cast<std::size_t>(k)] * in[static_cast<std::size_t>(src)];
            }
        }
        return acc;
    };
    const std::ptrdiff_t begin = std::max<std::ptrdiff_t>(0, fd.first);
    const std::ptrdiff_t end = std::min<std::ptrdiff_t>(n, n + fd.first + taps - 1);
    if (doppler_hz == 0.0) {
        for (std::ptrdiff_t i = begin; i < end; ++i) {
            out[static_cast<std::size_t>(i)] += gain * filtered(i);
        }
        return;
    }
    Rotator rot(doppler_hz, rate, t0);
    for (std::ptrdiff_t i = begin; i < end; ++i) {
        out[static_cast<std::size_t>(i)] += gain * rot.at(static_cast<std::size_t>(i)) * filtered(i);
    }
}

} // namespace

double ChannelRealization::max_delay_samples() const noexcept {
    double m = 0.0;
    for (const auto& p : paths) {
        m = std::max(m, p.delay_samples);
    }
    return m;
}

bool ChannelRealization::exceeds_cp(std::size_t cp_length) const noexcept {
    for (const auto& p : paths) {
        const FractionalDelay fd = fractional_delay(p.delay_samples);
        const auto last = fd.first + static_cast<std::ptrdiff_t>(fd.taps.size()) - 1;
        if (fd.first < 0 || last > static_cast<std::ptrdiff_t>(cp_length)) {
            return true;
        }
    }
    return false;
}

FractionalDelay fractional_delay(double delay_samples) {
    if (!(delay_samples >= 0.0) || !std::isfinite(delay_samples)) {
        throw std::domain_error("fractional_delay: delay must be finite and non-negative");
    }
    const double whole = std::floor(delay_samples);
    const double frac = delay_samples - whole;
    FractionalDelay fd;
    if (frac < 1e-9 || frac > 1.0 - 1e-9) {
        fd.first = static_cast<std::ptrdiff_t>(std::llround(delay_samples));
        fd.taps = {1.0};
        return fd;
    }
    constexpr auto half = static_cast<std::ptrdiff_t>(kInterpolatorTaps / 2);
    fd.first = static_cast<std::ptrdiff_t>(whole) - (half - 1);
    fd.taps.resize(kInterpolatorTaps);
    double sum = 0.0;
    for (std::size_t i = 0; i < kInterpolatorTaps; ++i) {
        const double x = static_cast<double>(fd.first + static_cast<std::ptrdiff_t>(i)) - delay_samples;
        const double w = 0.5 * (1.0 + std::cos(kPi * x / static_cast<double>(half)));
        fd.taps[i] = sinc(x) * w;
        sum += fd.taps[i];
    }
    for (auto& t : fd.taps) {
        t /= sum;
    }
    return fd;
}

SignalFrame apply_channel(const SignalFrame& frame, const ChannelRealization& realization,
                          std::size_t time_offset) {
    if (realization.paths.empty()) {
        throw std::invalid_argument("apply_channel: realization has no paths");
    }
    if (frame.sample_rate_hz != realization.sample_rate_hz) {
        throw std::invalid_argument("apply_channel: frame sample rate does not match channel");
    }
    SignalFrame out{CVec(frame.samples.size()), frame.sample_rate_hz, frame.origin};
    for (const auto& p : realization.paths) {
        accumulate_path(frame.samples, out.samples, p.gain, p.delay_samples, p.doppler_hz,
                        frame.sample_rate_hz, static_cast<double>(time_offset));
    }
    return out;
}

double noise_variance_for(const SignalFrame& frame, double snr_db) {
    if (snr_db == kNoiseless) {
        return 0.0;
    }
    const double p = mean_power(frame.samples);
    if (!(p > 0.0)) {
        throw std::domain_error("add_noise: frame has no energy");
    }
    return p / std::pow(10.0, snr_db / 10.0);
}

SignalFrame add_noise(const SignalFrame& frame, double snr_db, Rng& rng) {
    const double var = noise_variance_for(frame, snr_db);
    SignalFrame out = frame;
    if (var == 0.0) {
        return out;
    }
    std::normal_distribution<double> gauss(0.0, std::sqrt(var / 2.0));
    for (auto& s : out.samples) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s += cplx{re, im};
    }
    return out;
}

SignalFrame generate_echo(const SignalFrame& frame, const EchoSet& echoes) {
    SignalFrame out{CVec(frame.samples.size()), frame.sample_rate_hz, frame.origin};
    const double window = frame.duration_s();
    for (const auto& e : echoes.echoes) {
        if (!(e.delay_s >= 0.0)) {
            throw std::domain_error("generate_echo: negative echo delay");
        }
        if (e.delay_s >= window) {
            throw std::domain_error("generate_echo: echo delay beyond observation window");
        }
        accumulate_path(frame.samples, out.samples, e.coefficient, e.delay_s * frame.sample_rate_hz,
                        e.doppler_hz, frame.sample_rate_hz, 0.0);
    }
    return out;
}

CVec frequency_response(const ChannelRealization& realization, std::size_t bins,
                        double time_samples) {
    CVec h(bins);
    const auto nb = static_cast<std::ptrdiff_t>(bins);
    for (const auto& p : realization.paths) {
        const FractionalDelay fd = fractional_delay(p.delay_samples);
        const double cycles = realization.sample_rate_hz > 0.0 ? p.doppler_hz / realization.sample_rate_hz : 0.0;
        const cplx coef = p.gain * std::polar(1.0, 2.0 * kPi * std::fmod(cycles * time_samples, 1.0));
        for (std::size_t i = 0; i < fd.taps.size(); ++i) {
            const std::ptrdiff_t lag = ((fd.first + static_cast<std::ptrdiff_t>(i)) % nb + nb) % nb;
            const cplx step = std::polar(1.0, -2.0 * kPi * static_cast<double>(lag) / static_cast<double>(bins));
            cplx phase{1.0, 0.0};
            const cplx w = coef * fd.taps[i];
            for (std::size_t k = 0; k < bins; ++k) {
                h[k] += w * phase;
                phase *= step;
            }
        }
    }
    return h;
}

Eigen::MatrixXcd block_channel_matrix(const ChannelRealization& realization, std::size_t block,
                                      std::size_t time_offset) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(block),
                                                static_cast<Eigen::Index>(block));
    const auto nb = static_cast<std::ptrdiff_t>(block);
    for (const auto& p : realization.paths) {
        const FractionalDelay fd = fractional_delay(p.delay_samples);
        Rotator rot(p.doppler_hz, realization.sample_rate_hz, static_cast<double>(time_offset));
        for (std::ptrdiff_t n = 0; n < nb; ++n) {
            const cplx coef = p.gain * (p.doppler_hz == 0.0 ? cplx{1.0, 0.0} : rot.at(static_cast<std::size_t>(n)));
            for (std::size_t i = 0; i < fd.taps.size(); ++i) {
                std::ptrdiff_t col = (n - fd.first - static_cast<std::ptrdiff_t>(i)) % nb;
                if (col < 0) {
                    col += nb;
                }
                h(n, col) += coef * fd.taps[i];
            }
        }
    }
    return h;
}

} // namespace isacwave

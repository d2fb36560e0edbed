#include "isacwave/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace isacwave {

namespace {

// Forward twiddles e^{-j2*pi*k/n}, k < n/2, cached per size and thread.
const CVec& twiddles(std::size_t n) {
    thread_local std::unordered_map<std::size_t, CVec> cache;
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    CVec w(n / 2);
    for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
    }
    return cache.emplace(n, std::move(w)).first->second;
}

void radix2(std::span<cplx> x, bool inverse) {
    const std::size_t n = x.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(x[i], x[j]);
        }
    }
    const CVec& w = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const cplx tw = inverse ? std::conj(w[k * stride]) : w[k * stride];
                const cplx u = x[i + k];
                const cplx v = x[i + k + half] * tw;
                x[i + k] = u + v;
                x[i + k + half] = u - v;
            }
        }
    }
}

void direct_dft(std::span<cplx> x, bool inverse) {
    const std::size_t n = x.size();
    const double sign = inverse ? 1.0 : -1.0;
    CVec out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{};
        for (std::size_t m = 0; m < n; ++m) {
            const auto idx = static_cast<double>((k * m) % n);
            acc += x[m] * std::polar(1.0, sign * 2.0 * kPi * idx / static_cast<double>(n));
        }
        out[k] = acc;
    }
    std::copy(out.begin(), out.end(), x.begin());
}

} // namespace

std::size_t next_pow2(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

void fft_inplace(std::span<cplx> data, bool inverse) {
    if (data.size() <= 1) {
        return;
    }
    if (is_pow2(data.size())) {
        radix2(data, inverse);
    } else {
        direct_dft(data, inverse);
    }
}

CVec fft_unitary(std::span<const cplx> x) {
    CVec out(x.begin(), x.end());
    fft_inplace(out, false);
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(out.size(), 1)));
    for (auto& v : out) {
        v *= scale;
    }
    return out;
}

CVec ifft_unitary(std::span<const cplx> x) {
    CVec out(x.begin(), x.end());
    fft_inplace(out, true);
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(out.size(), 1)));
    for (auto& v : out) {
        v *= scale;
    }
    return out;
}

double energy(std::span<const cplx> x) noexcept {
    return std::accumulate(x.begin(), x.end(), 0.0,
                           [](double acc, const cplx& v) { return acc + std::norm(v); });
}

double mean_power(std::span<const cplx> x) noexcept {
    return x.empty() ? 0.0 : energy(x) / static_cast<double>(x.size());
}

std::vector<double> interpolated_xcorr(std::span<const cplx> a, std::span<const cplx> b,
                                       std::size_t oversampling) {
    const std::size_t n = std::max(a.size(), b.size());
    const std::size_t p = next_pow2(2 * n);
    CVec fa(p), fb(p);
    std::copy(a.begin(), a.end(), fa.begin());
    std::copy(b.begin(), b.end(), fb.begin());
    fft_inplace(fa, false);
    fft_inplace(fb, false);

    const std::size_t os = std::max<std::size_t>(oversampling, 1);
    const std::size_t q = p * os;
    CVec spec(q);
    const std::size_t half = p / 2;
    for (std::size_t k = 0; k < half; ++k) {
        spec[k] = fa[k] * std::conj(fb[k]);
        spec[q - half + k] = fa[half + k] * std::conj(fb[half + k]);
    }
    fft_inplace(spec, true);

    std::vector<double> mag(q);
    const double scale = 1.0 / static_cast<double>(p);
    for (std::size_t m = 0; m < q; ++m) {
        mag[m] = std::abs(spec[m]) * scale;
    }
    return mag;
}

} // namespace isacwave

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace isacwave {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 3.0e8;

constexpr bool is_pow2(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }
std::size_t next_pow2(std::size_t n) noexcept;

// Unnormalized in-place DFT. Radix-2 for power-of-two sizes, direct O(n^2)
// evaluation otherwise. The inverse uses e^{+j} twiddles and no scaling.
void fft_inplace(std::span<cplx> data, bool inverse);

// Unitary transforms (1/sqrt(n) scaling in both directions).
CVec fft_unitary(std::span<const cplx> x);
CVec ifft_unitary(std::span<const cplx> x);

double energy(std::span<const cplx> x) noexcept;
double mean_power(std::span<const cplx> x) noexcept;

/// Magnitude of the aperiodic cross-correlation r(k) = sum_n a[n] conj(b[n-k]),
/// band-limited interpolated by `oversampling`. Entry m of the result is the
/// lag m/oversampling for m < size/2 and (m - size)/oversampling otherwise,
/// where size = oversampling * next_pow2(2 * max(|a|, |b|)).
std::vector<double> interpolated_xcorr(std::span<const cplx> a, std::span<const cplx> b,
                                       std::size_t oversampling);

} // namespace isacwave

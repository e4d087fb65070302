#pragma once

// Band-limited RMS via a plain radix-2 FFT: lets tests measure the music
// bed (broadband noise) separately from sine-based voice content.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace spectrum {

inline void fft_inplace(std::vector<std::complex<double>>& a) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double angle = -2.0 * M_PI / static_cast<double>(len);
        std::complex<double> wn(std::cos(angle), std::sin(angle));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (size_t k = 0; k < len / 2; ++k) {
                auto u = a[i + k];
                auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wn;
            }
        }
    }
}

// RMS (dBFS) of the [lo_hz, hi_hz) band over the given samples, averaged
// across 32768-sample windows.
inline double band_rms_dbfs(std::span<const float> samples, int sample_rate, double lo_hz,
                            double hi_hz) {
    constexpr size_t kWindow = 32768;
    if (samples.size() < kWindow) return -120.0;
    double power_acc = 0;
    size_t windows = 0;
    for (size_t start = 0; start + kWindow <= samples.size(); start += kWindow) {
        std::vector<std::complex<double>> buf(kWindow);
        for (size_t i = 0; i < kWindow; ++i) buf[i] = samples[start + i];
        fft_inplace(buf);
        auto lo_bin = static_cast<size_t>(lo_hz * kWindow / sample_rate);
        auto hi_bin = static_cast<size_t>(hi_hz * kWindow / sample_rate);
        hi_bin = std::min(hi_bin, kWindow / 2);
        double power = 0;
        for (size_t k = lo_bin; k < hi_bin; ++k)
            power += std::norm(buf[k]) * 2.0;  // + mirrored bin
        power /= static_cast<double>(kWindow) * kWindow;
        power_acc += power;
        ++windows;
    }
    double mean_power = power_acc / static_cast<double>(windows);
    if (mean_power <= 0) return -120.0;
    return 10.0 * std::log10(mean_power);
}

} // namespace spectrum

#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "bodepace/errors.hpp"

namespace bodepace {

/// Normalized request-intensity curve; the day's intensities sum to 1.
class TrafficCurve {
public:
    TrafficCurve() = default;

    /// Uniformly sampled curve starting at t = 0. Intensities are normalized here.
    TrafficCurve(std::vector<double> intensity, double resolution_s)
        : resolution_s_(resolution_s), intensity_(std::move(intensity)) {
        detail::require(resolution_s > 0.0, "traffic resolution must be positive");
        detail::require(!intensity_.empty(), "traffic curve is empty");
        double sum = 0.0;
        for (const double v : intensity_) {
            detail::require(std::isfinite(v) && v >= 0.0, "traffic intensities must be finite and >= 0");
            sum += v;
        }
        detail::require(sum > 0.0, "traffic curve has zero total intensity");
        for (double& v : intensity_) {
            v /= sum;
        }
        suffix_.assign(intensity_.size() + 1, 0.0);
        for (std::size_t i = intensity_.size(); i-- > 0;) {
            suffix_[i] = suffix_[i + 1] + intensity_[i];
        }
        const auto [lo, hi] = std::minmax_element(intensity_.begin(), intensity_.end());
        min_ = *lo;
        max_ = *hi;
    }

    static TrafficCurve uniform(std::size_t samples, double resolution_s) {
        return {std::vector<double>(samples, 1.0), resolution_s};
    }

    [[nodiscard]] double resolution_s() const { return resolution_s_; }
    [[nodiscard]] double duration_s() const { return resolution_s_ * static_cast<double>(intensity_.size()); }
    [[nodiscard]] std::size_t size() const { return intensity_.size(); }
    [[nodiscard]] const std::vector<double>& intensities() const { return intensity_; }
    [[nodiscard]] double min_intensity() const { return min_; }
    [[nodiscard]] double max_intensity() const { return max_; }

    /// Bin index holding time t, clamped to the curve.
    [[nodiscard]] std::size_t bin(double t_s) const {
        if (t_s <= 0.0) {
            return 0;
        }
        const auto i = static_cast<std::size_t>(t_s / resolution_s_);
        return std::min(i, intensity_.size() - 1);
    }

    [[nodiscard]] double at(double t_s) const { return intensity_[bin(t_s)]; }

    /// Intensity still to come after t, counting the unexpired part of the current bin.
    [[nodiscard]] double remaining(double t_s) const {
        if (t_s >= duration_s()) {
            return 0.0;
        }
        const std::size_t i = bin(t_s);
        const double left = std::clamp((static_cast<double>(i + 1) * resolution_s_ - t_s) / resolution_s_, 0.0, 1.0);
        return intensity_[i] * left + suffix_[i + 1];
    }

    /// Position of t within [min, max] intensity; 1 for a flat curve.
    [[nodiscard]] double relative_level(double t_s) const {
        if (max_ - min_ <= 0.0) {
            return 1.0;
        }
        return (at(t_s) - min_) / (max_ - min_);
    }

private:
    double resolution_s_ = 60.0;
    std::vector<double> intensity_;
    std::vector<double> suffix_;
    double min_ = 0.0;
    double max_ = 0.0;
};

namespace detail {

/// FFTW's planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

inline constexpr double seconds_per_day = 86400.0;

struct DiurnalSpec {
    int harmonics = 8;           ///< highest multiple of the daily fundamental
    double resolution_s = 60.0;
    double peak_time_s = 72000.0;
    double floor_frac = 0.1;     ///< minimum intensity as a fraction of the peak-to-trough swing

    friend bool operator==(const DiurnalSpec&, const DiurnalSpec&) = default;
};

/// Σ_k (1/k)·cos(2πk(t − t_peak)/day), shifted positive and normalized.
inline TrafficCurve synthetic_diurnal(const DiurnalSpec& spec = {}) {
    detail::require(spec.harmonics >= 1, "diurnal curve needs at least one harmonic");
    detail::require(spec.resolution_s > 0.0, "traffic resolution must be positive");
    detail::require(spec.floor_frac > 0.0, "floor fraction must be positive");
    const auto n = static_cast<std::size_t>(std::llround(seconds_per_day / spec.resolution_s));
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * spec.resolution_s;
        for (int k = 1; k <= spec.harmonics; ++k) {
            v[i] += std::cos(2.0 * std::numbers::pi * k * (t - spec.peak_time_s) / seconds_per_day) / k;
        }
    }
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double shift = *lo - spec.floor_frac * (*hi - *lo);
    for (double& x : v) {
        x -= shift;
    }
    return {std::move(v), spec.resolution_s};
}

struct Spectrum {
    std::vector<double> freq_hz;    ///< 0 … Nyquist
    std::vector<double> magnitude;  ///< single-sided amplitude
    double peak_magnitude = 0.0;
    std::vector<std::size_t> significant_bins;
    double max_significant_freq_hz = 0.0;  ///< 0 when nothing is significant
    double bin_width_hz = 0.0;
};

/**
 * Amplitude spectrum of the mean-removed intensity sequence. Bins whose
 * magnitude exceeds `threshold` × peak are significant.
 */
inline Spectrum traffic_fft(std::span<const double> samples, double resolution_s, double threshold = 0.01) {
    detail::require(samples.size() >= 16, "FFT needs at least 16 samples");
    detail::require(resolution_s > 0.0, "sample resolution must be positive");
    detail::require(threshold > 0.0 && threshold < 1.0, "significance threshold must lie in (0, 1)");
    const std::size_t n = samples.size();
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);

    struct FftwFree {
        void operator()(void* p) const { fftw_free(p); }
    };
    std::unique_ptr<double[], FftwFree> in(fftw_alloc_real(n));
    std::unique_ptr<fftw_complex[], FftwFree> out(fftw_alloc_complex(n / 2 + 1));
    for (std::size_t i = 0; i < n; ++i) {
        detail::require(std::isfinite(samples[i]), "FFT input must be finite");
        in[i] = samples[i] - mean;
    }
    {
        const std::lock_guard lock(detail::fftw_planner_mutex());
        const fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
        if (plan == nullptr) {
            throw numerical_failure("FFTW plan creation failed");
        }
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    Spectrum s;
    s.bin_width_hz = 1.0 / (static_cast<double>(n) * resolution_s);
    const std::size_t half = n / 2 + 1;
    s.freq_hz.resize(half);
    s.magnitude.resize(half);
    for (std::size_t k = 0; k < half; ++k) {
        const double scale = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
        s.freq_hz[k] = static_cast<double>(k) * s.bin_width_hz;
        s.magnitude[k] = scale * std::hypot(out[k][0], out[k][1]) / static_cast<double>(n);
    }
    // DC carries only rounding residue after mean removal.
    s.peak_magnitude = *std::max_element(s.magnitude.begin() + 1, s.magnitude.end());
    const double noise_floor = 1e-12 * std::max(std::abs(mean), 1e-300);
    if (s.peak_magnitude <= noise_floor) {
        return s;
    }
    for (std::size_t k = 1; k < half; ++k) {
        if (s.magnitude[k] > threshold * s.peak_magnitude) {
            s.significant_bins.push_back(k);
            s.max_significant_freq_hz = s.freq_hz[k];
        }
    }
    return s;
}

inline Spectrum traffic_fft(const TrafficCurve& curve, double threshold = 0.01) {
    return traffic_fft(curve.intensities(), curve.resolution_s(), threshold);
}

}  // namespace bodepace

#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <numbers>
#include <span>
#include <vector>

#include "bodepace/errors.hpp"
#include "bodepace/transfer_function.hpp"

namespace bodepace {

/// Anything that maps a Laplace point s to a complex gain.
template <class F>
concept Response = requires(const F& f, std::complex<double> s) {
    { f(s) } -> std::convertible_to<std::complex<double>>;
};

struct FrequencyResponseSample {
    double freq_hz = 0.0;
    double magnitude_db = 0.0;
    double phase_deg = 0.0;  ///< unwrapped along the sweep
    std::complex<double> complex_value;
};

inline std::complex<double> s_at(double freq_hz) {
    return {0.0, 2.0 * std::numbers::pi * freq_hz};
}

inline double to_db(std::complex<double> v) { return 20.0 * std::log10(std::abs(v)); }

inline double to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Shift `wrapped_deg` by a multiple of 360 so it lies within 180 of `reference_deg`.
inline double unwrap_near(double wrapped_deg, double reference_deg) {
    return wrapped_deg - 360.0 * std::round((wrapped_deg - reference_deg) / 360.0);
}

/// `count` log-spaced frequencies from start to stop inclusive.
inline std::vector<double> log_space(double start_hz, double stop_hz, std::size_t count) {
    detail::require(start_hz > 0.0 && stop_hz > start_hz, "log sweep needs 0 < start < stop");
    detail::require(count >= 2, "log sweep needs at least two points");
    std::vector<double> out(count);
    const double a = std::log10(start_hz);
    const double b = std::log10(stop_hz);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    out.front() = start_hz;
    out.back() = stop_hz;
    return out;
}

/// Log sweep at a fixed density, always including both endpoints.
inline std::vector<double> log_sweep_per_decade(double start_hz, double stop_hz, double points_per_decade) {
    detail::require(points_per_decade > 0.0, "points per decade must be positive");
    const double decades = std::log10(stop_hz / start_hz);
    const auto count = static_cast<std::size_t>(std::ceil(decades * points_per_decade)) + 1;
    return log_space(start_hz, stop_hz, std::max<std::size_t>(count, 2));
}

/**
 * Evaluate a response at s = j·2πf for every frequency, unwrapping phase so
 * that consecutive samples differ by less than 180°.
 */
template <Response R>
std::vector<FrequencyResponseSample> freq_response(const R& response, std::span<const double> freqs_hz) {
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
        detail::require(freqs_hz[i] > 0.0, "frequencies must be positive");
        detail::require(i == 0 || freqs_hz[i] > freqs_hz[i - 1], "frequencies must be strictly increasing");
    }
    std::vector<FrequencyResponseSample> out;
    out.reserve(freqs_hz.size());
    for (const double f : freqs_hz) {
        const std::complex<double> v = response(s_at(f));
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw singular_evaluation("non-finite response at " + std::to_string(f) + " Hz");
        }
        double phase = to_deg(std::arg(v));
        if (!out.empty()) {
            phase = unwrap_near(phase, out.back().phase_deg);
        }
        out.push_back({f, to_db(v), phase, v});
    }
    return out;
}

}  // namespace bodepace

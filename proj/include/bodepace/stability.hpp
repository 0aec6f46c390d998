#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "bodepace/errors.hpp"
#include "bodepace/frequency_response.hpp"
#include "bodepace/plant.hpp"

namespace bodepace {

struct AnalysisOptions {
    double sweep_start_hz = 1e-7;
    double points_per_decade = 600.0;
    /// Upper edge of the margin and bandwidth search. Unset means the Nyquist frequency.
    std::optional<double> search_ceiling_hz;
    double bisection_rel_tol = 1e-6;
    /// Traffic-spectrum frequency at which the closed-loop cutoff gain is read.
    double f_traffic_max_hz = 9.3e-5;

    friend bool operator==(const AnalysisOptions&, const AnalysisOptions&) = default;
};

/// Bode stability and dynamics summary of one loop configuration.
struct StabilityReport {
    double gm_db = std::numeric_limits<double>::infinity();  ///< +inf when the phase never crosses −180°
    std::optional<double> pm_deg;                             ///< absent when |L| never crosses 1
    double cog_db = 0.0;
    std::optional<double> clbw_hz;
    std::optional<double> gain_crossover_hz;
    std::optional<double> phase_crossover_hz;
    double nyquist_hz = 0.0;
    double search_ceiling_hz = 0.0;

    std::vector<double> gain_crossovers_hz;   ///< every |L| = 1 crossing, ascending
    std::vector<double> phase_crossovers_hz;  ///< every −180° (mod 360°) crossing, ascending

    [[nodiscard]] bool has_gain_margin() const { return phase_crossover_hz.has_value(); }
    [[nodiscard]] bool has_phase_margin() const { return pm_deg.has_value(); }
    /// A reported crossover lies above Nyquist (only possible with a raised ceiling).
    [[nodiscard]] bool aliased() const {
        return (gain_crossover_hz && *gain_crossover_hz > nyquist_hz) ||
               (phase_crossover_hz && *phase_crossover_hz > nyquist_hz);
    }
    /// Positive GM and PM, with a missing phase crossover counting as infinite GM.
    [[nodiscard]] bool stable_margins() const { return gm_db > 0.0 && pm_deg.value_or(-1.0) > 0.0; }
};

namespace detail {

/// Bisect on log-frequency for the root of g, given g(lo) and g(hi) of opposite sign.
template <class G>
double bisect_log(G&& g, double lo, double hi, double g_lo, double rel_tol) {
    while ((hi - lo) > rel_tol * lo) {
        const double mid = std::sqrt(lo * hi);
        const double g_mid = g(mid);
        if (g_mid == 0.0) {
            return mid;
        }
        if ((g_mid < 0.0) == (g_lo < 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return std::sqrt(lo * hi);
}

template <Response R>
double dc_reference_db(const R& response, double fallback_hz) {
    try {
        const std::complex<double> v = response(std::complex<double>{0.0, 0.0});
        if (std::isfinite(v.real()) && std::isfinite(v.imag()) && std::abs(v) > 0.0) {
            return to_db(v);
        }
    } catch (const singular_evaluation&) {
    }
    return to_db(response(s_at(fallback_hz)));
}

}  // namespace detail

/**
 * Gain/phase margins, cutoff gain and closed-loop bandwidth.
 *
 * Crossovers are bracketed on a log sweep from options.sweep_start_hz to the
 * search ceiling and refined by bisection. Margins refer to the lowest
 * crossover of each kind; every crossover found is listed in the report.
 */
template <Response OpenLoop, Response ClosedLoop>
StabilityReport stability_report(const OpenLoop& open_loop, const ClosedLoop& closed_loop, double t_ps,
                                 const AnalysisOptions& options = {}) {
    detail::require(t_ps > 0.0, "t_ps must be positive");
    detail::require(options.f_traffic_max_hz > 0.0, "f_traffic_max must be positive");

    StabilityReport report;
    report.nyquist_hz = 0.5 / t_ps;
    report.search_ceiling_hz = options.search_ceiling_hz.value_or(report.nyquist_hz);
    const double tol = options.bisection_rel_tol;

    const std::vector<double> freqs =
        log_sweep_per_decade(options.sweep_start_hz, report.search_ceiling_hz, options.points_per_decade);
    const auto samples = freq_response(open_loop, freqs);

    auto mag_db = [&](double f) { return to_db(open_loop(s_at(f))); };

    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const auto& a = samples[i];
        const auto& b = samples[i + 1];

        if (a.magnitude_db == 0.0) {
            report.gain_crossovers_hz.push_back(a.freq_hz);
        } else if ((a.magnitude_db < 0.0) != (b.magnitude_db < 0.0) && b.magnitude_db != 0.0) {
            report.gain_crossovers_hz.push_back(detail::bisect_log(mag_db, a.freq_hz, b.freq_hz, a.magnitude_db, tol));
        }

        // Phase crossings of −180° + k·360°: the band index changes between samples.
        const double band_a = std::floor((a.phase_deg + 180.0) / 360.0);
        const double band_b = std::floor((b.phase_deg + 180.0) / 360.0);
        if (band_a != band_b) {
            const double level = -180.0 + 360.0 * std::max(band_a, band_b);
            double ref = a.phase_deg;
            auto phase_offset = [&](double f) {
                const double p = unwrap_near(to_deg(std::arg(open_loop(s_at(f)))), ref);
                return p - level;
            };
            double lo = a.freq_hz;
            double hi = b.freq_hz;
            double g_lo = a.phase_deg - level;
            while ((hi - lo) > tol * lo) {
                const double mid = std::sqrt(lo * hi);
                const double g_mid = phase_offset(mid);
                if ((g_mid < 0.0) == (g_lo < 0.0)) {
                    lo = mid;
                    g_lo = g_mid;
                    ref = g_mid + level;
                } else {
                    hi = mid;
                }
            }
            report.phase_crossovers_hz.push_back(std::sqrt(lo * hi));
        }
    }

    if (!report.gain_crossovers_hz.empty()) {
        const double f = report.gain_crossovers_hz.front();
        report.gain_crossover_hz = f;
        // Phase at the crossover, continued from the nearest sweep sample below it.
        double ref = samples.front().phase_deg;
        for (const auto& s : samples) {
            if (s.freq_hz > f) {
                break;
            }
            ref = s.phase_deg;
        }
        report.pm_deg = 180.0 + unwrap_near(to_deg(std::arg(open_loop(s_at(f)))), ref);
    }
    if (!report.phase_crossovers_hz.empty()) {
        const double f = report.phase_crossovers_hz.front();
        report.phase_crossover_hz = f;
        report.gm_db = -mag_db(f);
    }

    const double dc_db = detail::dc_reference_db(closed_loop, options.sweep_start_hz);
    const double target = dc_db - 3.0;
    auto cl_offset = [&](double f) { return to_db(closed_loop(s_at(f))) - target; };
    double prev_f = freqs.front();
    double prev_g = cl_offset(prev_f);
    if (prev_g <= 0.0) {
        report.clbw_hz = prev_f;
    } else {
        for (std::size_t i = 1; i < freqs.size(); ++i) {
            const double g = cl_offset(freqs[i]);
            if (g <= 0.0) {
                report.clbw_hz = g == 0.0 ? freqs[i] : detail::bisect_log(cl_offset, prev_f, freqs[i], prev_g, tol);
                break;
            }
            prev_f = freqs[i];
            prev_g = g;
        }
    }

    report.cog_db = to_db(closed_loop(s_at(options.f_traffic_max_hz)));
    return report;
}

inline StabilityReport stability_report(const PacingLoop& loop, const AnalysisOptions& options = {}) {
    return stability_report(loop.open_loop_response(), loop.closed_loop_response(), loop.plant().t_ps, options);
}

}  // namespace bodepace

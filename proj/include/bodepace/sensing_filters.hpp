#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bodepace/errors.hpp"
#include "bodepace/transfer_function.hpp"

namespace bodepace {

/// First-order LPF 1/(1 + sT_f) discretized by Tustin at period T.
struct LpfConfig {
    double t_f = 1.0;       ///< time constant, s
    double t_sample = 1.0;  ///< sampling period T, s

    void validate() const {
        detail::require(t_f > 0.0, "LPF time constant must be positive");
        detail::require(t_sample > 0.0, "LPF sample period must be positive");
    }

    [[nodiscard]] double a() const { return (t_sample - 2.0 * t_f) / (t_sample + 2.0 * t_f); }
    [[nodiscard]] double b() const { return t_sample / (t_sample + 2.0 * t_f); }
};

struct LpfState {
    double u_prev = 0.0;
    double y_prev = 0.0;
};

/// y[k] = b·u[k] + b·u[k−1] − a·y[k−1]
inline double lpf_step(const LpfConfig& cfg, LpfState& state, double u) {
    if (!std::isfinite(u)) {
        throw invalid_configuration("LPF input must be finite");
    }
    const double b = cfg.b();
    const double y = b * u + b * state.u_prev - cfg.a() * state.y_prev;
    state.u_prev = u;
    state.y_prev = y;
    return y;
}

class LowPassFilter {
public:
    explicit LowPassFilter(LpfConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    double step(double u) { return lpf_step(cfg_, state_, u); }

    /// Start as if `value` had been applied forever.
    void preload(double value) { state_ = {value, value}; }

    [[nodiscard]] double output() const { return state_.y_prev; }
    [[nodiscard]] const LpfConfig& config() const { return cfg_; }

private:
    LpfConfig cfg_;
    LpfState state_;
};

/// y[k] = β·u[k] + (1 − β)·y[k−1]
struct SmootherConfig {
    double beta = 0.5;
    double t_sample = 1.0;

    void validate() const {
        detail::require(beta > 0.0 && beta <= 1.0, "smoother beta must lie in (0, 1]");
        detail::require(t_sample > 0.0, "smoother sample period must be positive");
    }
};

struct SmootherState {
    double y_prev = 0.0;
};

inline double smoother_step(const SmootherConfig& cfg, SmootherState& state, double u) {
    if (!std::isfinite(u)) {
        throw invalid_configuration("smoother input must be finite");
    }
    state.y_prev = cfg.beta * u + (1.0 - cfg.beta) * state.y_prev;
    return state.y_prev;
}

/// Laplace-domain equivalent β(1 + 0.5sT) / ((1 − 0.5β)sT + β); unity DC gain.
inline TransferFunction smoother_to_laplace(const SmootherConfig& cfg) {
    cfg.validate();
    const double t = cfg.t_sample;
    return {Polynomial({cfg.beta, 0.5 * cfg.beta * t}), Polynomial({cfg.beta, (1.0 - 0.5 * cfg.beta) * t})};
}

/// Irregularly timed spend-velocity observations.
struct SampleStream {
    std::vector<double> timestamps;  ///< s, strictly increasing
    std::vector<double> values;      ///< $/min

    void validate() const {
        detail::require(timestamps.size() == values.size(), "timestamps and values differ in length");
        for (std::size_t i = 0; i < timestamps.size(); ++i) {
            detail::require(std::isfinite(values[i]) && values[i] >= 0.0, "sample values must be finite and >= 0");
            detail::require(i == 0 || timestamps[i] > timestamps[i - 1], "timestamps must be strictly increasing");
        }
    }
};

struct RegularizedStream {
    double start_s = 0.0;
    double t_sample = 0.0;
    std::vector<double> values;
};

/**
 * Quantize to the median sampling interval and fill the uniform grid by linear
 * interpolation. With an even number of intervals the lower-middle one is used,
 * so the period is always an interval that was actually observed.
 */
inline RegularizedStream regularize(const SampleStream& stream) {
    detail::require(stream.timestamps.size() >= 2, "regularize needs at least two samples");
    stream.validate();
    const auto& t = stream.timestamps;
    const auto& v = stream.values;

    std::vector<double> intervals(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        intervals[i] = t[i + 1] - t[i];
    }
    const std::size_t mid = (intervals.size() - 1) / 2;
    std::nth_element(intervals.begin(), intervals.begin() + static_cast<std::ptrdiff_t>(mid), intervals.end());
    const double ts = intervals[mid];

    const double span = t.back() - t.front();
    const auto count = static_cast<std::size_t>(std::floor(span / ts + 1e-9)) + 1;

    RegularizedStream out{t.front(), ts, {}};
    out.values.reserve(count);
    std::size_t j = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = t.front() + static_cast<double>(i) * ts;
        while (j + 2 < t.size() && t[j + 1] <= x) {
            ++j;
        }
        const double snap = 1e-9 * ts;
        if (std::abs(x - t[j]) <= snap) {
            out.values.push_back(v[j]);
        } else if (std::abs(x - t[j + 1]) <= snap) {
            out.values.push_back(v[j + 1]);
        } else {
            const double w = std::clamp((x - t[j]) / (t[j + 1] - t[j]), 0.0, 1.0);
            out.values.push_back(v[j] + w * (v[j + 1] - v[j]));
        }
    }
    return out;
}

}  // namespace bodepace

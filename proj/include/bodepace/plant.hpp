#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "bodepace/errors.hpp"
#include "bodepace/transfer_function.hpp"

namespace bodepace {

/// Linearized spend plant around one operating point.
struct PlantParams {
    double w_n = 13.52;            ///< plant gain, $/(λ·min)
    double t_ps = 10.0;            ///< pacing interval held by the ZOH, s
    double t_f = 10.0 / (2.0 * std::numbers::pi);  ///< sensing LPF time constant, s
    int taylor_order = 10;         ///< highest power kept in the e^{-sT} expansion

    void validate() const {
        detail::require(w_n > 0.0, "plant gain w_n must be positive");
        detail::require(t_ps > 0.0, "pacing interval t_ps must be positive");
        detail::require(t_f > 0.0, "filter time constant t_f must be positive");
        detail::require(taylor_order >= 2, "taylor_order must be at least 2");
    }

    [[nodiscard]] double nyquist_hz() const { return 0.5 / t_ps; }

    friend bool operator==(const PlantParams&, const PlantParams&) = default;
};

/// How the zero-order hold enters a frequency evaluation.
enum class ZohModel {
    taylor,  ///< truncated-series polynomial (a rational transfer function)
    exact,   ///< (1 − e^{−sT})/s evaluated directly
};

/**
 * Polynomial form of (1 − e^{−sT})/s with e^{−sT} expanded to the given order.
 *
 * The constant term of the expansion cancels the leading 1, so dividing by s is
 * exact: coefficient k is T·(−T)^k/(k+1)! for k = 0 … order−1.
 */
inline TransferFunction zoh_tf(double t_ps, int taylor_order) {
    detail::require(t_ps > 0.0, "ZOH interval must be positive");
    detail::require(taylor_order >= 2, "taylor_order must be at least 2");
    std::vector<double> c(static_cast<std::size_t>(taylor_order));
    double term = t_ps;  // T·(−T)^k/(k+1)!
    for (int k = 0; k < taylor_order; ++k) {
        c[static_cast<std::size_t>(k)] = term;
        term *= -t_ps / static_cast<double>(k + 2);
    }
    return {Polynomial(std::move(c)), Polynomial::constant(1.0)};
}

/// (1 − e^{−sT})/s without series truncation.
inline std::complex<double> zoh_exact(std::complex<double> s, double t_ps) {
    const std::complex<double> x = s * t_ps;
    if (std::abs(x) < 1e-4) {
        return t_ps * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0);
    }
    return (1.0 - std::exp(-x)) / s;
}

/// H(s) = 1/(1 + s·T_f).
inline TransferFunction sensing_lpf_tf(double t_f) {
    detail::require(t_f > 0.0, "filter time constant must be positive");
    return {Polynomial::constant(1.0), Polynomial({1.0, t_f})};
}

/// ZOH·G(s): the forward plant path without the sensing filter.
inline TransferFunction plant_forward(const PlantParams& p) {
    p.validate();
    return tf_series(zoh_tf(p.t_ps, p.taylor_order), TransferFunction::gain(p.w_n));
}

/// ZOH·G(s)·H(s); DC gain is w_n·t_ps.
inline TransferFunction plant_open_loop(const PlantParams& p) {
    return tf_series(plant_forward(p), sensing_lpf_tf(p.t_f));
}

/**
 * Compensated pacing loop Gc·ZOH·G with H in the feedback path.
 *
 * The closed loop is reference-to-spend tracking, Gc·ZOH·G / (1 + Gc·ZOH·G·H).
 * Rational forms always use the Taylor ZOH; the complex evaluators honour the
 * selected ZohModel.
 */
class PacingLoop {
public:
    PacingLoop(TransferFunction compensator, const PlantParams& plant, ZohModel zoh = ZohModel::taylor)
        : compensator_(std::move(compensator)),
          plant_(plant),
          zoh_(zoh),
          lpf_(sensing_lpf_tf(plant.t_f)),
          forward_(tf_series(compensator_, plant_forward(plant))),
          open_(tf_series(forward_, lpf_)),
          closed_(tf_feedback(forward_, lpf_)) {}

    [[nodiscard]] const TransferFunction& compensator() const { return compensator_; }
    [[nodiscard]] const PlantParams& plant() const { return plant_; }
    [[nodiscard]] ZohModel zoh_model() const { return zoh_; }

    [[nodiscard]] const TransferFunction& forward_tf() const { return forward_; }
    [[nodiscard]] const TransferFunction& open_loop_tf() const { return open_; }
    [[nodiscard]] const TransferFunction& closed_loop_tf() const { return closed_; }

    [[nodiscard]] std::complex<double> open_loop(std::complex<double> s) const {
        if (zoh_ == ZohModel::taylor) {
            return open_(s);
        }
        return exact_forward(s) * lpf_(s);
    }

    [[nodiscard]] std::complex<double> closed_loop(std::complex<double> s) const {
        if (zoh_ == ZohModel::taylor) {
            return closed_(s);
        }
        const std::complex<double> f = exact_forward(s);
        return f / (1.0 + f * lpf_(s));
    }

    /// Callable views usable wherever a Response is expected.
    [[nodiscard]] auto open_loop_response() const {
        return [this](std::complex<double> s) { return open_loop(s); };
    }
    [[nodiscard]] auto closed_loop_response() const {
        return [this](std::complex<double> s) { return closed_loop(s); };
    }

private:
    [[nodiscard]] std::complex<double> exact_forward(std::complex<double> s) const {
        return compensator_(s) * zoh_exact(s, plant_.t_ps) * plant_.w_n;
    }

    TransferFunction compensator_;
    PlantParams plant_;
    ZohModel zoh_;
    TransferFunction lpf_;
    TransferFunction forward_;
    TransferFunction open_;
    TransferFunction closed_;
};

}  // namespace bodepace

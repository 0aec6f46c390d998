#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bodepace/errors.hpp"
#include "bodepace/transfer_function.hpp"

namespace bodepace {

/// Ratio of polynomials in z^-1; coefficient i multiplies z^-i.
class DiscreteTransferFunction {
public:
    DiscreteTransferFunction(std::vector<double> num_z, std::vector<double> den_z, double t_z)
        : num_(std::move(num_z)), den_(std::move(den_z)), t_z_(t_z) {
        detail::require(!den_.empty() && den_.front() != 0.0, "den_z[0] must be non-zero");
        detail::require(t_z > 0.0, "sampling period t_z must be positive");
        if (num_.empty()) {
            num_.push_back(0.0);
        }
    }

    [[nodiscard]] std::span<const double> num_z() const { return num_; }
    [[nodiscard]] std::span<const double> den_z() const { return den_; }
    [[nodiscard]] double t_z() const { return t_z_; }

    [[nodiscard]] std::complex<double> operator()(std::complex<double> z) const {
        const std::complex<double> w = 1.0 / z;
        return eval(num_, w) / eval(den_, w);
    }

    /// Value on the unit circle at z = e^{j·2πf·T_z}.
    [[nodiscard]] std::complex<double> at_hz(double freq_hz) const {
        return (*this)(std::polar(1.0, 2.0 * std::numbers::pi * freq_hz * t_z_));
    }

    [[nodiscard]] double dc_gain() const { return (*this)(std::complex<double>{1.0, 0.0}).real(); }

private:
    static std::complex<double> eval(const std::vector<double>& c, std::complex<double> w) {
        std::complex<double> acc{0.0, 0.0};
        for (auto it = c.rbegin(); it != c.rend(); ++it) {
            acc = acc * w + *it;
        }
        return acc;
    }

    std::vector<double> num_;
    std::vector<double> den_;
    double t_z_;
};

namespace detail {

/// Σ c_k · scale^k · first^k · second^(n−k), padded to n+1 coefficients.
inline std::vector<double> bilinear_expand(const Polynomial& p, const Polynomial& first, const Polynomial& second,
                                           double scale, std::size_t n) {
    std::vector<double> out(n + 1, 0.0);
    double scale_k = 1.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double c = p[k];
        if (c != 0.0) {
            const Polynomial term = poly_mul(poly_pow(first, k), poly_pow(second, n - k));
            for (std::size_t i = 0; i < term.coeffs().size(); ++i) {
                out[i] += c * scale_k * term.coeffs()[i];
            }
        }
        scale_k *= scale;
    }
    return out;
}

}  // namespace detail

/**
 * Bilinear (Tustin) discretization, s = (2/T)(1 − z^-1)/(1 + z^-1), without
 * frequency pre-warping. Numerator and denominator are multiplied through by
 * (1 + z^-1)^N, N = denominator degree, which keeps the DC gain exact.
 */
inline DiscreteTransferFunction tustin(const TransferFunction& tf_s, double t_z) {
    detail::require(t_z > 0.0, "sampling period t_z must be positive");
    if (!tf_s.is_proper()) {
        throw invalid_configuration("improper transfer function cannot be discretized causally");
    }
    const auto n = static_cast<std::size_t>(std::max(tf_s.denominator().degree(), 0));
    const Polynomial one_minus({1.0, -1.0});
    const Polynomial one_plus({1.0, 1.0});
    const double k = 2.0 / t_z;
    return {detail::bilinear_expand(tf_s.numerator(), one_minus, one_plus, k, n),
            detail::bilinear_expand(tf_s.denominator(), one_minus, one_plus, k, n), t_z};
}

/// Inverse map z^-1 = (1 − 0.5sT)/(1 + 0.5sT), cleared to a rational function of s.
inline TransferFunction inverse_tustin(const DiscreteTransferFunction& dtf) {
    const double t = dtf.t_z();
    const std::size_t n = std::max(dtf.num_z().size(), dtf.den_z().size()) - 1;
    const Polynomial first({1.0, -0.5 * t});
    const Polynomial second({1.0, 0.5 * t});
    const Polynomial num(std::vector<double>(dtf.num_z().begin(), dtf.num_z().end()));
    const Polynomial den(std::vector<double>(dtf.den_z().begin(), dtf.den_z().end()));
    return {Polynomial(detail::bilinear_expand(num, first, second, 1.0, n)),
            Polynomial(detail::bilinear_expand(den, first, second, 1.0, n))};
}

/// Deployment hand-off form of a recurrence: y[k] = Σ a_i·y[k−i] + Σ b_i·u[k−i].
struct RecurrenceCoefficients {
    double t_z = 0.0;
    std::vector<double> a;  ///< a_1 … a_m
    std::vector<double> b;  ///< b_0 … b_n

    friend bool operator==(const RecurrenceCoefficients&, const RecurrenceCoefficients&) = default;
};

inline void to_json(nlohmann::json& j, const RecurrenceCoefficients& c) {
    j = nlohmann::json{{"t_z", c.t_z}, {"a", c.a}, {"b", c.b}};
}

inline void from_json(const nlohmann::json& j, RecurrenceCoefficients& c) {
    j.at("t_z").get_to(c.t_z);
    j.at("a").get_to(c.a);
    j.at("b").get_to(c.b);
    detail::require(c.t_z > 0.0, "recurrence t_z must be positive");
    detail::require(!c.b.empty(), "recurrence needs at least one input coefficient");
}

/**
 * Executable difference equation with its input/output history.
 *
 * Histories start at zero. A filter instance has a single owner; stepping it
 * from several threads is not supported.
 */
class RecurrenceFilter {
public:
    RecurrenceFilter(std::vector<double> a, std::vector<double> b)
        : a_(std::move(a)), b_(std::move(b)), u_hist_(b_.empty() ? 0 : b_.size() - 1, 0.0), y_hist_(a_.size(), 0.0) {
        detail::require(!b_.empty(), "recurrence needs at least one input coefficient");
    }

    explicit RecurrenceFilter(const RecurrenceCoefficients& c) : RecurrenceFilter(c.a, c.b) {}

    [[nodiscard]] std::span<const double> a() const { return a_; }
    [[nodiscard]] std::span<const double> b() const { return b_; }
    [[nodiscard]] std::span<const double> input_history() const { return u_hist_; }
    [[nodiscard]] std::span<const double> output_history() const { return y_hist_; }

    double step(double u) {
        const double y = evaluate(u);
        push(u, y);
        return y;
    }

    /// Step with the output clamped before it enters the history (saturating actuator).
    double step(double u, double lo, double hi) {
        const double y = std::clamp(evaluate(u), lo, hi);
        push(u, y);
        return y;
    }

    /// Set every past output to `y` and every past input to zero.
    void preload_output(double y) {
        std::fill(y_hist_.begin(), y_hist_.end(), y);
        std::fill(u_hist_.begin(), u_hist_.end(), 0.0);
    }

    /// Set the history to the steady state of a constant input `u` (DC-gain output).
    void preload_steady_state(double u) {
        std::fill(u_hist_.begin(), u_hist_.end(), u);
        std::fill(y_hist_.begin(), y_hist_.end(), steady_state_gain() * u);
    }

    void reset() {
        std::fill(u_hist_.begin(), u_hist_.end(), 0.0);
        std::fill(y_hist_.begin(), y_hist_.end(), 0.0);
    }

    /// Σb / (1 − Σa); infinite for a pure accumulator.
    [[nodiscard]] double steady_state_gain() const {
        double sa = 0.0;
        double sb = 0.0;
        for (const double v : a_) {
            sa += v;
        }
        for (const double v : b_) {
            sb += v;
        }
        return sb / (1.0 - sa);
    }

    [[nodiscard]] RecurrenceCoefficients coefficients(double t_z) const { return {t_z, a_, b_}; }

private:
    [[nodiscard]] double evaluate(double u) const {
        if (!std::isfinite(u)) {
            throw invalid_configuration("recurrence input must be finite");
        }
        double y = b_[0] * u;
        for (std::size_t i = 0; i < u_hist_.size(); ++i) {
            y += b_[i + 1] * u_hist_[i];
        }
        for (std::size_t i = 0; i < y_hist_.size(); ++i) {
            y += a_[i] * y_hist_[i];
        }
        return y;
    }

    void push(double u, double y) {
        if (!u_hist_.empty()) {
            std::rotate(u_hist_.rbegin(), u_hist_.rbegin() + 1, u_hist_.rend());
            u_hist_.front() = u;
        }
        if (!y_hist_.empty()) {
            std::rotate(y_hist_.rbegin(), y_hist_.rbegin() + 1, y_hist_.rend());
            y_hist_.front() = y;
        }
    }

    std::vector<double> a_;
    std::vector<double> b_;
    std::vector<double> u_hist_;  ///< u[k−1], u[k−2], …
    std::vector<double> y_hist_;  ///< y[k−1], y[k−2], …
};

/// Normalize so den_z[0] = 1, then a_i = −den_z[i], b_i = num_z[i].
inline RecurrenceFilter to_recurrence(const DiscreteTransferFunction& dtf) {
    const double d0 = dtf.den_z()[0];
    std::vector<double> a;
    for (std::size_t i = 1; i < dtf.den_z().size(); ++i) {
        a.push_back(-dtf.den_z()[i] / d0);
    }
    std::vector<double> b;
    for (const double v : dtf.num_z()) {
        b.push_back(v / d0);
    }
    return {std::move(a), std::move(b)};
}

}  // namespace bodepace

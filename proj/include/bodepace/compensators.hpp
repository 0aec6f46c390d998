#pragma once

#include <type_traits>
#include <variant>
#include <vector>

#include "bodepace/errors.hpp"
#include "bodepace/transfer_function.hpp"

namespace bodepace {

/// Gc(s) = K_p + K_i/s + K_d·s
struct PidSpec {
    double k_p = 0.0;
    double k_i = 0.0;  ///< 1/s
    double k_d = 0.0;  ///< s

    void validate() const {
        detail::require(k_p >= 0.0 && k_i >= 0.0 && k_d >= 0.0, "PID gains must be non-negative");
        detail::require(k_p > 0.0 || k_i > 0.0 || k_d > 0.0, "PID gains must not all be zero");
    }

    friend bool operator==(const PidSpec&, const PidSpec&) = default;
};

/// Gc(s) = K_c·Π(s/z_i + 1) / Π(s/p_j + 1), corners in rad/s.
struct ZeroPoleSpec {
    double k_c = 1.0;
    std::vector<double> zeros;
    std::vector<double> poles;

    void validate() const {
        detail::require(k_c > 0.0, "zero-pole gain k_c must be positive");
        for (const double z : zeros) {
            detail::require(z > 0.0, "zero corner frequencies must be positive");
        }
        for (const double p : poles) {
            detail::require(p > 0.0, "pole corner frequencies must be positive");
        }
    }

    friend bool operator==(const ZeroPoleSpec&, const ZeroPoleSpec&) = default;
};

using CompensatorSpec = std::variant<PidSpec, ZeroPoleSpec>;

/**
 * (K_d s² + K_p s + K_i)/s. Without an integral term no s factor is introduced,
 * so a pure P or PD compensator stays a polynomial.
 */
inline TransferFunction pid_tf(const PidSpec& spec) {
    spec.validate();
    if (spec.k_i == 0.0) {
        return {Polynomial({spec.k_p, spec.k_d}), Polynomial::constant(1.0)};
    }
    return {Polynomial({spec.k_i, spec.k_p, spec.k_d}), Polynomial({0.0, 1.0})};
}

inline TransferFunction zero_pole_tf(const ZeroPoleSpec& spec) {
    spec.validate();
    Polynomial num = Polynomial::constant(spec.k_c);
    Polynomial den = Polynomial::constant(1.0);
    for (const double z : spec.zeros) {
        num = num * Polynomial({1.0, 1.0 / z});
    }
    for (const double p : spec.poles) {
        den = den * Polynomial({1.0, 1.0 / p});
    }
    return {num, den};
}

inline TransferFunction to_transfer_function(const CompensatorSpec& spec) {
    return std::visit(
        [](const auto& s) -> TransferFunction {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, PidSpec>) {
                return pid_tf(s);
            } else {
                return zero_pole_tf(s);
            }
        },
        spec);
}

}  // namespace bodepace

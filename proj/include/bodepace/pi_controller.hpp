#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "bodepace/compensators.hpp"
#include "bodepace/errors.hpp"

namespace bodepace {

/// Smallest λ ever emitted; keeps the multiplier inside (0, 1].
inline constexpr double lambda_floor = 1e-6;

/// Mutable state of one cohort's PI(D) pacing controller.
struct PiRuntimeState {
    double integrator = 0.0;
    double last_lambda = lambda_floor;
    std::pair<double, double> integrator_bounds{0.0, 0.5};
    std::pair<double, double> lambda_bounds{lambda_floor, 1.0};  ///< emitted λ ∈ [first, second]
    std::optional<double> last_error;                            ///< for the derivative term
};

/**
 * One controller update with conditional-integration anti-windup.
 *
 * The integrator only accumulates K_i·error·dt while the candidate lumped
 * output K_p·e + I (+ D) is strictly inside (0, 1); it is then clamped to its
 * bounds. The emitted λ uses the updated integrator.
 */
inline double pi_step(PiRuntimeState& state, const PidSpec& gains, double error, double dt) {
    if (!std::isfinite(error)) {
        throw invalid_configuration("pacing error must be finite");
    }
    detail::require(dt > 0.0, "controller step dt must be positive");

    const double derivative =
        (gains.k_d > 0.0 && state.last_error) ? gains.k_d * (error - *state.last_error) / dt : 0.0;
    const double proportional = gains.k_p * error;

    const double candidate = proportional + state.integrator + derivative;
    if (candidate > 0.0 && candidate < 1.0) {
        state.integrator = std::clamp(state.integrator + gains.k_i * error * dt, state.integrator_bounds.first,
                                      state.integrator_bounds.second);
    }
    const double lumped = proportional + state.integrator + derivative;
    state.last_lambda = std::clamp(lumped, state.lambda_bounds.first, state.lambda_bounds.second);
    state.last_error = error;
    return state.last_lambda;
}

/// PI(D) controller bound to its gains.
class PiController {
public:
    explicit PiController(PidSpec gains, PiRuntimeState state = {}) : gains_(gains), state_(std::move(state)) {
        gains_.validate();
    }

    /// Seed the integrator with a previously running λ.
    void preload(double lambda) {
        state_.integrator = std::clamp(lambda, state_.integrator_bounds.first, state_.integrator_bounds.second);
        state_.last_lambda = std::clamp(lambda, state_.lambda_bounds.first, state_.lambda_bounds.second);
    }

    double step(double error, double dt) { return pi_step(state_, gains_, error, dt); }

    [[nodiscard]] const PiRuntimeState& state() const { return state_; }
    [[nodiscard]] const PidSpec& gains() const { return gains_; }

private:
    PidSpec gains_;
    PiRuntimeState state_;
};

}  // namespace bodepace

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "bodepace/errors.hpp"

namespace bodepace {

/// Desired (dS) and actual (aS) spend velocity, one pair per measurement.
struct CohortSeries {
    std::vector<double> desired;
    std::vector<double> actual;
    double daily_spend = 0.0;  ///< basis of the cohort weight
};

struct PacingErrorReport {
    double pe = 0.0;
    double swpe = 0.0;                ///< (1/N)·Σ W_i·e_i
    double weighted_mean_error = 0.0;  ///< Σ W_i·e_i
    std::vector<double> per_cohort_errors;
    std::vector<double> weights;
    std::size_t excluded = 0;  ///< pairs dropped because dS = 0
};

/// Mean of |dS − aS|/dS over pairs with dS > 0.
inline double relative_tracking_error(std::span<const double> desired, std::span<const double> actual,
                                      std::size_t* excluded = nullptr) {
    detail::require(desired.size() == actual.size(), "desired and actual series differ in length");
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < desired.size(); ++j) {
        detail::require(std::isfinite(desired[j]) && std::isfinite(actual[j]), "spend series must be finite");
        if (desired[j] > 0.0) {
            sum += std::abs(desired[j] - actual[j]) / desired[j];
            ++used;
        } else if (excluded != nullptr) {
            ++*excluded;
        }
    }
    detail::require(used > 0, "desired spend series is all zero; pacing error undefined");
    return sum / static_cast<double>(used);
}

/**
 * PE = (1/N)·Σ_i e_i and SWPE = (1/N)·Σ_i W_i·e_i, where e_i is the cohort's
 * mean relative error and W_i its share of total daily spend.
 */
inline PacingErrorReport pacing_error(std::span<const CohortSeries> cohorts) {
    detail::require(!cohorts.empty(), "pacing error needs at least one cohort");
    PacingErrorReport r;
    double spend_total = 0.0;
    for (const auto& c : cohorts) {
        detail::require(c.daily_spend >= 0.0 && std::isfinite(c.daily_spend), "cohort spend must be finite and >= 0");
        spend_total += c.daily_spend;
        r.per_cohort_errors.push_back(relative_tracking_error(c.desired, c.actual, &r.excluded));
    }
    const auto n = static_cast<double>(cohorts.size());
    for (const auto& c : cohorts) {
        r.weights.push_back(spend_total > 0.0 ? c.daily_spend / spend_total : 1.0 / n);
    }
    for (std::size_t i = 0; i < cohorts.size(); ++i) {
        r.pe += r.per_cohort_errors[i];
        r.weighted_mean_error += r.weights[i] * r.per_cohort_errors[i];
    }
    r.pe /= n;
    r.swpe = r.weighted_mean_error / n;
    return r;
}

inline void to_json(nlohmann::json& j, const PacingErrorReport& r) {
    j = nlohmann::json{{"pe", r.pe},
                       {"swpe", r.swpe},
                       {"weighted_mean_error", r.weighted_mean_error},
                       {"per_cohort_errors", r.per_cohort_errors},
                       {"weights", r.weights},
                       {"excluded", r.excluded}};
}

}  // namespace bodepace

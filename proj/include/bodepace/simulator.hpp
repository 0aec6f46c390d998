#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "bodepace/compensators.hpp"
#include "bodepace/discretization.hpp"
#include "bodepace/errors.hpp"
#include "bodepace/io.hpp"
#include "bodepace/metrics.hpp"
#include "bodepace/pi_controller.hpp"
#include "bodepace/sensing_filters.hpp"
#include "bodepace/traffic.hpp"

namespace bodepace {

/// Fixed-step relay used as the uncompensated reference controller.
struct BaselineSpec {
    double step = 0.01;

    void validate() const { detail::require(step > 0.0 && step < 1.0, "baseline step must lie in (0, 1)"); }
    friend bool operator==(const BaselineSpec&, const BaselineSpec&) = default;
};

using ControllerSpec = std::variant<PidSpec, ZeroPoleSpec, BaselineSpec>;

enum class NoiseModel {
    sigma_proportional,     ///< σ = noise_frac · nominal
    variance_proportional,  ///< σ² = noise_frac · nominal
};

/// How W_n follows the traffic curve.
enum class WnMode {
    traffic,  ///< linear between w_n_min and w_n_max with traffic level
    max,
    min,
};

struct CohortConfig {
    std::string name = "cohort";
    double daily_budget = 387.5;  ///< $
    double initial_lambda = 0.05;
    double w_n_max = 13.52;  ///< $/(λ·min)
    double w_n_min = 1.707;  ///< $/(λ·min)
    double t_ps = 10.0;      ///< pacing interval, s
    double t_as = 0.87;      ///< auction / sensing interval, s
    double t_f = 10.0 / (2.0 * std::numbers::pi);
    double noise_frac = 0.05;
    NoiseModel noise_model = NoiseModel::sigma_proportional;
    WnMode w_n_mode = WnMode::traffic;
    ControllerSpec controller = PidSpec{5e-4, 5e-5, 0.0};
    double horizon_s = seconds_per_day;
    std::uint64_t seed = 42;

    void validate() const {
        detail::require(daily_budget > 0.0, "daily_budget must be positive");
        detail::require(initial_lambda > 0.0 && initial_lambda <= 1.0, "initial_lambda must lie in (0, 1]");
        detail::require(w_n_min > 0.0 && w_n_max >= w_n_min, "need w_n_max >= w_n_min > 0");
        detail::require(t_ps > 0.0 && t_as > 0.0 && t_f > 0.0, "t_ps, t_as and t_f must be positive");
        detail::require(t_as <= t_ps, "t_as must not exceed t_ps");
        detail::require(noise_frac >= 0.0 && std::isfinite(noise_frac), "noise_frac must be finite and >= 0");
        detail::require(horizon_s >= t_ps, "horizon must cover at least one pacing interval");
        std::visit([](const auto& c) { c.validate(); }, controller);
    }

    friend bool operator==(const CohortConfig&, const CohortConfig&) = default;
};

struct TraceRow {
    double time_s = 0.0;
    double desired_v = 0.0;   ///< $/min
    double true_v = 0.0;      ///< mean spend velocity over the pacing cycle, $/min
    double observed_v = 0.0;  ///< LPF output, $/min
    double lambda = 0.0;
    double integrator = 0.0;
    double cum_spend = 0.0;  ///< $

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct SimTrace {
    std::string name;
    double daily_budget = 0.0;
    std::vector<TraceRow> rows;
    std::optional<double> exhausted_at_s;

    [[nodiscard]] double remaining_budget(std::size_t i) const { return daily_budget - rows.at(i).cum_spend; }
    [[nodiscard]] double final_spend() const { return rows.empty() ? 0.0 : rows.back().cum_spend; }

    [[nodiscard]] CohortSeries series() const {
        CohortSeries s;
        for (const auto& r : rows) {
            s.desired.push_back(r.desired_v);
            s.actual.push_back(r.true_v);
        }
        s.daily_spend = final_spend();
        return s;
    }

    friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

/// Remaining budget spread by the current share of remaining traffic, in $/min.
inline double desired_velocity(double remaining_budget, double current_traffic, double remaining_traffic,
                               double resolution_min) {
    detail::require(resolution_min > 0.0, "traffic resolution must be positive");
    if (remaining_traffic <= 0.0 || remaining_budget <= 0.0) {
        return 0.0;
    }
    return remaining_budget * current_traffic / remaining_traffic / resolution_min;
}

/// Fluid-limit spend over dt minutes: W_n·λ·dt plus Gaussian noise, floored at 0 and capped by the budget.
template <class Rng>
double plant_step(double w_n_t, double lambda, double dt_min, Rng& rng, double noise_frac = 0.0,
                  NoiseModel model = NoiseModel::sigma_proportional,
                  double remaining_budget = std::numeric_limits<double>::infinity()) {
    const double nominal = w_n_t * lambda * dt_min;
    double spend = nominal;
    if (noise_frac > 0.0 && nominal > 0.0) {
        const double sigma = model == NoiseModel::sigma_proportional ? noise_frac * nominal : std::sqrt(noise_frac * nominal);
        spend += std::normal_distribution<double>(0.0, sigma)(rng);
    }
    return std::clamp(spend, 0.0, std::max(remaining_budget, 0.0));
}

/// λ ← clamp(λ + δ·sign(e), ε, 1).
struct BaselineState {
    double lambda = lambda_floor;
};

inline double baseline_step_controller(BaselineState& state, const BaselineSpec& spec, double error) {
    if (!std::isfinite(error)) {
        throw invalid_configuration("pacing error must be finite");
    }
    const double dir = error > 0.0 ? 1.0 : (error < 0.0 ? -1.0 : 0.0);
    state.lambda = std::clamp(state.lambda + spec.step * dir, lambda_floor, 1.0);
    return state.lambda;
}

namespace detail {

/// One cohort's controller, whatever its kind.
class RuntimeController {
public:
    RuntimeController(const ControllerSpec& spec, double t_ps, double initial_lambda) {
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, PidSpec>) {
                    PiController pi(s);
                    pi.preload(initial_lambda);
                    impl_.template emplace<PiController>(std::move(pi));
                } else if constexpr (std::is_same_v<T, ZeroPoleSpec>) {
                    auto filter = to_recurrence(tustin(zero_pole_tf(s), t_ps));
                    filter.preload_output(initial_lambda);
                    impl_.template emplace<RecurrenceFilter>(std::move(filter));
                } else {
                    impl_.template emplace<Baseline>(Baseline{s, BaselineState{initial_lambda}});
                }
            },
            spec);
        dt_ = t_ps;
    }

    double update(double error) {
        return std::visit(
            [&](auto& c) -> double {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, PiController>) {
                    return c.step(error, dt_);
                } else if constexpr (std::is_same_v<T, RecurrenceFilter>) {
                    return c.step(error, lambda_floor, 1.0);
                } else if constexpr (std::is_same_v<T, Baseline>) {
                    return baseline_step_controller(c.state, c.spec, error);
                } else {
                    throw invalid_configuration("controller not initialised");
                }
            },
            impl_);
    }

    [[nodiscard]] double integrator() const {
        if (const auto* pi = std::get_if<PiController>(&impl_)) {
            return pi->state().integrator;
        }
        return 0.0;
    }

private:
    struct Baseline {
        BaselineSpec spec;
        BaselineState state;
    };
    std::variant<std::monostate, PiController, RecurrenceFilter, Baseline> impl_;
    double dt_ = 1.0;
};

}  // namespace detail

/**
 * Closed-loop day simulation.
 *
 * The plant spends every t_as; the LPF senses each tick's velocity; every
 * t_ps the controller turns (desired − observed) into a new λ that is held
 * until the next update. One trace row is recorded per pacing update.
 */
inline SimTrace run_closed_loop(const CohortConfig& cfg, const TrafficCurve& traffic) {
    cfg.validate();
    detail::require(traffic.size() > 0, "traffic curve is empty");
    detail::require(traffic.duration_s() + 1e-9 >= cfg.horizon_s, "traffic curve does not cover the horizon");

    std::mt19937_64 rng(cfg.seed);
    LowPassFilter lpf(LpfConfig{cfg.t_f, cfg.t_as});
    detail::RuntimeController controller(cfg.controller, cfg.t_ps, cfg.initial_lambda);

    const double dt_min = cfg.t_as / 60.0;
    const double resolution_min = traffic.resolution_s() / 60.0;
    auto w_n_at = [&](double t) {
        switch (cfg.w_n_mode) {
            case WnMode::max:
                return cfg.w_n_max;
            case WnMode::min:
                return cfg.w_n_min;
            case WnMode::traffic:
                break;
        }
        return cfg.w_n_min + (cfg.w_n_max - cfg.w_n_min) * traffic.relative_level(t);
    };

    SimTrace trace{cfg.name, cfg.daily_budget, {}, std::nullopt};
    const auto cycles = static_cast<std::size_t>(std::floor(cfg.horizon_s / cfg.t_ps + 1e-9));
    trace.rows.reserve(cycles);

    double lambda = cfg.initial_lambda;
    double cum = 0.0;
    double t = 0.0;
    std::uint64_t tick = 1;   // index of the next sensing instant
    double tick_spend = 0.0;  // spend since the previous sensing instant
    bool first = true;
    for (std::size_t p = 0; p < cycles; ++p) {
        const double t_update = static_cast<double>(p + 1) * cfg.t_ps;
        double cycle_spend = 0.0;
        // Spend accrues continuously; sensing instants and the pacing update split the cycle into segments.
        while (t < t_update) {
            const double t_tick = static_cast<double>(tick) * cfg.t_as;
            const double t_end = std::min(t_tick, t_update);
            const double spend = plant_step(w_n_at(t), lambda, (t_end - t) / 60.0, rng, cfg.noise_frac,
                                            cfg.noise_model, cfg.daily_budget - cum);
            cum += spend;
            cycle_spend += spend;
            tick_spend += spend;
            t = t_end;
            if (t_end == t_tick) {
                const double v = tick_spend / dt_min;
                if (first) {
                    lpf.preload(v);
                    first = false;
                }
                lpf.step(v);
                tick_spend = 0.0;
                ++tick;
            }
            if (!trace.exhausted_at_s && cum >= cfg.daily_budget * (1.0 - 1e-12)) {
                trace.exhausted_at_s = t;
            }
        }

        const double desired =
            desired_velocity(cfg.daily_budget - cum, traffic.at(t_update), traffic.remaining(t_update), resolution_min);
        const double observed = lpf.output();
        lambda = controller.update(desired - observed);
        if (trace.exhausted_at_s) {
            lambda = lambda_floor;
        }
        trace.rows.push_back(
            {t_update, desired, cycle_spend / (cfg.t_ps / 60.0), observed, lambda, controller.integrator(), cum});
    }
    return trace;
}

/// Independent cohorts simulated concurrently; results keep input order.
inline std::vector<SimTrace> run_cohorts(std::span<const CohortConfig> cohorts, const TrafficCurve& traffic) {
    std::vector<std::future<SimTrace>> jobs;
    jobs.reserve(cohorts.size());
    for (const auto& c : cohorts) {
        jobs.push_back(std::async(std::launch::async, [&c, &traffic] { return run_closed_loop(c, traffic); }));
    }
    std::vector<SimTrace> out;
    out.reserve(cohorts.size());
    for (auto& j : jobs) {
        out.push_back(j.get());
    }
    return out;
}

/**
 * Rescale every cohort's W_n envelope by (B_i/B_0)·(λ_0/λ_i) relative to the
 * first cohort, so a λ that is in equilibrium for cohort 0's plant maps to
 * each cohort's own starting λ. Models controllers preloaded from a running
 * system rather than started cold.
 */
inline void scale_to_equilibrium(std::span<CohortConfig> cohorts) {
    if (cohorts.empty()) {
        return;
    }
    const double b0 = cohorts.front().daily_budget;
    const double l0 = cohorts.front().initial_lambda;
    for (auto& c : cohorts) {
        c.validate();
        const double k = (c.daily_budget / b0) * (l0 / c.initial_lambda);
        c.w_n_max *= k;
        c.w_n_min *= k;
    }
}

struct AdSet {
    const char* name;
    double daily_budget;
    double initial_lambda;
};

/// Seven production cohorts: daily budget ($) and the λ they were running at.
inline constexpr std::array<AdSet, 7> reference_ad_sets{{
    {"ad_set_1", 387.5, 0.05},
    {"ad_set_2", 250.0, 0.2},
    {"ad_set_3", 800.0, 0.015},
    {"ad_set_4", 500.0, 0.02},
    {"ad_set_5", 111.0, 0.07},
    {"ad_set_6", 275.0, 0.017},
    {"ad_set_7", 248.0, 0.5},
}};

/// Reference cohorts built on `base`, seeded base.seed + index.
inline std::vector<CohortConfig> reference_cohorts(const CohortConfig& base, bool equilibrium_scaled = true) {
    std::vector<CohortConfig> out;
    for (std::size_t i = 0; i < reference_ad_sets.size(); ++i) {
        CohortConfig c = base;
        c.name = reference_ad_sets[i].name;
        c.daily_budget = reference_ad_sets[i].daily_budget;
        c.initial_lambda = reference_ad_sets[i].initial_lambda;
        c.seed = base.seed + i;
        out.push_back(std::move(c));
    }
    if (equilibrium_scaled) {
        scale_to_equilibrium(out);
    }
    return out;
}

inline PacingErrorReport pacing_error(std::span<const SimTrace> traces) {
    std::vector<CohortSeries> series;
    series.reserve(traces.size());
    for (const auto& t : traces) {
        series.push_back(t.series());
    }
    return pacing_error(std::span<const CohortSeries>(series));
}

inline const std::vector<std::string>& trace_csv_header() {
    static const std::vector<std::string> h{"time_s",  "desired_v",  "true_v",   "observed_v",
                                            "lambda",  "integrator", "cum_spend"};
    return h;
}

inline std::string trace_to_csv(const SimTrace& trace) {
    CsvTable t{trace_csv_header(), {}};
    t.rows.reserve(trace.rows.size());
    for (const auto& r : trace.rows) {
        t.rows.push_back({r.time_s, r.desired_v, r.true_v, r.observed_v, r.lambda, r.integrator, r.cum_spend});
    }
    return to_csv(t);
}

inline SimTrace trace_from_csv(std::string_view text, double daily_budget, std::string name = "cohort") {
    const auto t = parse_csv(text, trace_csv_header());
    SimTrace trace{std::move(name), daily_budget, {}, std::nullopt};
    for (const auto& r : t.rows) {
        trace.rows.push_back({r[0], r[1], r[2], r[3], r[4], r[5], r[6]});
    }
    return trace;
}

/// Synthetic second-price landscape: competing bids log-normal, ad value fixed.
struct BidLandscape {
    double requests_per_min = 1000.0;
    double ad_value = 5.0;  ///< $ bid at λ = 1
    double competitor_log_mean = -1.0;
    double competitor_log_sigma = 0.8;
    std::size_t samples = 20000;
    std::uint64_t seed = 7;
};

/**
 * Spend velocity sv(λ) from explicit auctions and its finite-difference
 * slope, i.e. the local plant gain W_n at λ.
 */
inline double estimate_plant_gain(const BidLandscape& land, double lambda, double d_lambda = 1e-3) {
    detail::require(lambda > d_lambda && lambda + d_lambda <= 1.0, "lambda ± d_lambda must stay in (0, 1]");
    std::mt19937_64 rng(land.seed);
    std::lognormal_distribution<double> competitor(land.competitor_log_mean, land.competitor_log_sigma);
    std::vector<double> prices(land.samples);
    for (double& c : prices) {
        c = competitor(rng);
    }
    // Common random numbers keep the difference quotient smooth.
    auto velocity = [&](double lam) {
        const double bid = lam * land.ad_value;
        double paid = 0.0;
        for (const double c : prices) {
            if (c < bid) {
                paid += c;
            }
        }
        return land.requests_per_min * paid / static_cast<double>(prices.size());
    };
    return (velocity(lambda + d_lambda) - velocity(lambda - d_lambda)) / (2.0 * d_lambda);
}

}  // namespace bodepace

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bodepace/compensators.hpp"
#include "bodepace/plant.hpp"
#include "bodepace/stability.hpp"

namespace bodepace {

/// One compensator judged against both ends of the plant-gain envelope.
struct CompensatorEvaluation {
    CompensatorSpec compensator;
    StabilityReport report_max_wn;
    StabilityReport report_min_wn;
    bool feasible = false;  ///< GM > 0 and PM > 0 at max W_n
};

struct GridSearchResult : CompensatorEvaluation {
    double k_p = 0.0;
    double k_i = 0.0;
};

inline CompensatorEvaluation evaluate_compensator(const CompensatorSpec& spec, const PlantParams& plant_max,
                                                  const PlantParams& plant_min, const AnalysisOptions& options = {},
                                                  ZohModel zoh = ZohModel::taylor) {
    const TransferFunction gc = to_transfer_function(spec);
    CompensatorEvaluation out{spec, stability_report(PacingLoop(gc, plant_max, zoh), options),
                              stability_report(PacingLoop(gc, plant_min, zoh), options), false};
    out.feasible = out.report_max_wn.stable_margins();
    return out;
}

/**
 * Evaluate every (K_p, K_i) PI cell. K_p varies fastest, matching the usual
 * table layout where each K_i block lists all K_p values.
 */
inline std::vector<GridSearchResult> grid_search(std::span<const double> k_p_set, std::span<const double> k_i_set,
                                                 const PlantParams& plant_max, const PlantParams& plant_min,
                                                 const AnalysisOptions& options = {},
                                                 ZohModel zoh = ZohModel::taylor) {
    detail::require(!k_p_set.empty() && !k_i_set.empty(), "grid search needs non-empty K_p and K_i sets");
    detail::require(plant_max.w_n > plant_min.w_n, "plant_max.w_n must exceed plant_min.w_n");
    std::vector<GridSearchResult> out;
    out.reserve(k_p_set.size() * k_i_set.size());
    for (const double k_i : k_i_set) {
        for (const double k_p : k_p_set) {
            GridSearchResult r;
            static_cast<CompensatorEvaluation&>(r) =
                evaluate_compensator(PidSpec{k_p, k_i, 0.0}, plant_max, plant_min, options, zoh);
            r.k_p = k_p;
            r.k_i = k_i;
            out.push_back(std::move(r));
        }
    }
    return out;
}

/// Among feasible cells: largest PM at min W_n, then largest GM at max W_n.
template <class Cell>
std::optional<std::size_t> best_cell(std::span<const Cell> cells) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        if (!c.feasible) {
            continue;
        }
        if (!best) {
            best = i;
            continue;
        }
        const auto& b = cells[*best];
        const double pm_c = c.report_min_wn.pm_deg.value_or(-1e300);
        const double pm_b = b.report_min_wn.pm_deg.value_or(-1e300);
        if (pm_c > pm_b || (pm_c == pm_b && c.report_max_wn.gm_db > b.report_max_wn.gm_db)) {
            best = i;
        }
    }
    return best;
}

}  // namespace bodepace

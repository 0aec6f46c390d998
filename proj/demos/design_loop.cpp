// End-to-end walk through the library: grid search, pick a compensator,
// discretize it, and run it for a day against the synthetic traffic curve.
#include <cstdio>
#include <numbers>
#include <span>

#include "bodepace/bodepace.hpp"

using namespace bodepace;

int main() {
    PlantParams max_wn{13.52, 10.0, 10.0 / (2.0 * std::numbers::pi), 9};
    PlantParams min_wn = max_wn;
    min_wn.w_n = 1.707;
    AnalysisOptions opt;
    opt.search_ceiling_hz = 0.1;

    const double kp[] = {5e-2, 5e-3, 5e-4};
    const double ki[] = {5e-3, 5e-4, 5e-5};
    const auto cells = grid_search(kp, ki, max_wn, min_wn, opt);
    std::printf("%-8s %-8s %9s %9s %9s %9s\n", "K_p", "K_i", "GM_max", "PM_max", "GM_min", "PM_min");
    for (const auto& c : cells) {
        std::printf("%-8g %-8g %9.2f %9.2f %9.2f %9.2f%s\n", c.k_p, c.k_i, c.report_max_wn.gm_db,
                    c.report_max_wn.pm_deg.value_or(NAN), c.report_min_wn.gm_db, c.report_min_wn.pm_deg.value_or(NAN),
                    c.feasible ? "" : "  (unstable at max W_n)");
    }

    // The anchor design: large margins at both ends of the gain envelope.
    const PidSpec pi{5e-4, 5e-5, 0.0};
    const auto rec = to_recurrence(tustin(pid_tf(pi), max_wn.t_ps));
    std::printf("\nrecurrence: y[k] = %.6g·y[k-1] + %.6g·u[k] + %.6g·u[k-1]\n", rec.a()[0], rec.b()[0], rec.b()[1]);

    const TrafficCurve traffic = synthetic_diurnal();
    const auto spectrum = traffic_fft(traffic);
    std::printf("traffic spectrum ceiling: %.4g Hz\n", spectrum.max_significant_freq_hz);

    CohortConfig cohort;
    cohort.controller = pi;
    const SimTrace trace = run_closed_loop(cohort, traffic);
    cohort.controller = BaselineSpec{};
    const SimTrace legacy = run_closed_loop(cohort, traffic);
    const SimTrace both[] = {trace, legacy};
    std::printf("day spend: PI $%.2f, step baseline $%.2f of $%.2f\n", trace.final_spend(), legacy.final_spend(),
                cohort.daily_budget);
    std::printf("tracking error: PI %.4f, step baseline %.4f\n", pacing_error(std::span(both, 1)).pe,
                pacing_error(std::span(both + 1, 1)).pe);
    return 0;
}

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bodepace/config.hpp"
#include "bodepace/discretization.hpp"
#include "bodepace/frequency_response.hpp"
#include "bodepace/grid_search.hpp"
#include "bodepace/io.hpp"
#include "bodepace/metrics.hpp"
#include "bodepace/plant.hpp"
#include "bodepace/sensing_filters.hpp"
#include "bodepace/simulator.hpp"
#include "bodepace/stability.hpp"
#include "bodepace/traffic.hpp"

namespace bodepace {

namespace detail {

inline nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : "nan"; }

}  // namespace detail

/// Absent quantities (no crossover) are null.
inline nlohmann::json stability_json(const StabilityReport& r) {
    return {{"gm_db", r.has_gain_margin() ? nlohmann::json(r.gm_db) : nlohmann::json(nullptr)},
            {"pm_deg", detail::optional_json(r.pm_deg)},
            {"cog_db", r.cog_db},
            {"clbw_hz", detail::optional_json(r.clbw_hz)},
            {"gain_crossover_hz", detail::optional_json(r.gain_crossover_hz)},
            {"phase_crossover_hz", detail::optional_json(r.phase_crossover_hz)},
            {"nyquist_hz", r.nyquist_hz}};
}

inline void require_margins(const StabilityReport& r, const char* which) {
    if (!r.has_gain_margin() || !r.has_phase_margin()) {
        throw numerical_failure(std::string("missing ") + (!r.has_phase_margin() ? "gain" : "phase") +
                                " crossover for the " + which + " loop");
    }
}

// bode ----------------------------------------------------------------------

struct BodeOutput {
    std::string open_loop_csv;
    std::optional<std::string> closed_loop_csv;
};

inline const std::vector<std::string>& bode_csv_header() {
    static const std::vector<std::string> h{"freq_hz", "mag_db", "phase_deg", "aliased"};
    return h;
}

template <Response F>
std::string bode_csv(const F& response, std::span<const double> freqs, double nyquist_hz) {
    CsvTable t{bode_csv_header(), {}};
    for (const auto& s : freq_response(response, freqs)) {
        t.rows.push_back({s.freq_hz, s.magnitude_db, s.phase_deg, s.freq_hz > nyquist_hz ? 1.0 : 0.0});
    }
    return to_csv(t);
}

inline BodeOutput cmd_bode(const RunConfig& cfg) {
    const PacingLoop loop(cfg.compensator_tf(), cfg.plant_max(), cfg.zoh);
    const auto freqs = log_space(cfg.bode.start_hz, cfg.bode.stop_hz, cfg.bode.points);
    BodeOutput out{bode_csv(loop.open_loop_response(), freqs, cfg.plant.nyquist_hz()), std::nullopt};
    if (cfg.bode.closed_loop) {
        out.closed_loop_csv = bode_csv(loop.closed_loop_response(), freqs, cfg.plant.nyquist_hz());
    }
    return out;
}

// margins -------------------------------------------------------------------

/// Max-W_n report at the top level, min-W_n report nested under "min_w_n".
inline nlohmann::json cmd_margins(const RunConfig& cfg) {
    const auto ev = [&](const PlantParams& p) {
        return stability_report(PacingLoop(cfg.compensator_tf(), p, cfg.zoh), cfg.analysis);
    };
    const auto max_r = ev(cfg.plant_max());
    const auto min_r = ev(cfg.plant_min());
    if (cfg.require_margins) {
        require_margins(max_r, "max-W_n");
        require_margins(min_r, "min-W_n");
    }
    auto j = stability_json(max_r);
    j["feasible"] = max_r.stable_margins();
    j["min_w_n"] = stability_json(min_r);
    return j;
}

inline std::string margins_csv(const nlohmann::json& j) {
    static const char* keys[] = {"gm_db", "pm_deg", "cog_db", "clbw_hz", "gain_crossover_hz", "phase_crossover_hz",
                                 "nyquist_hz"};
    std::string head = "w_n";
    for (const char* k : keys) {
        head += std::string(",") + k;
    }
    auto row = [&](const std::string& label, const nlohmann::json& o) {
        std::string r = label;
        for (const char* k : keys) {
            r += "," + (o.at(k).is_null() ? std::string("nan") : format_double(o.at(k).get<double>()));
        }
        return r + "\n";
    };
    return head + "\n" + row("max", j) + row("min", j.at("min_w_n"));
}

// gridsearch ----------------------------------------------------------------

inline std::string cmd_gridsearch(const RunConfig& cfg) {
    const auto pi = grid_search(cfg.grid.k_p_set, cfg.grid.k_i_set, cfg.plant_max(), cfg.plant_min(), cfg.analysis,
                                cfg.zoh);
    std::string out = "kind,kp,ki,zeros,poles,gm_max,pm_max,cog_max,clbw_max,gm_min,pm_min,cog_min,clbw_min,feasible\n";
    auto metrics = [](const CompensatorEvaluation& e) {
        std::string s;
        for (const auto* r : {&e.report_max_wn, &e.report_min_wn}) {
            s += "," + format_double(r->gm_db) + "," + detail::optional_cell(r->pm_deg) + "," +
                 format_double(r->cog_db) + "," + detail::optional_cell(r->clbw_hz);
        }
        return s + "," + (e.feasible ? "1" : "0") + "\n";
    };
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            s += (i ? ";" : "") + format_double(v[i]);
        }
        return s;
    };
    for (const auto& r : pi) {
        out += "pi," + format_double(r.k_p) + "," + format_double(r.k_i) + ",," + metrics(r);
    }
    for (const auto& zp : cfg.grid.zero_pole) {
        const auto e = evaluate_compensator(zp, cfg.plant_max(), cfg.plant_min(), cfg.analysis, cfg.zoh);
        out += "zero_pole,,," + list(zp.zeros) + "," + list(zp.poles) + metrics(e);
    }
    return out;
}

// simulate ------------------------------------------------------------------

struct SimulationOutput {
    std::vector<SimTrace> traces;
    std::vector<SimTrace> baseline_traces;
    nlohmann::json report;
};

inline TrafficCurve load_traffic(const RunConfig& cfg) {
    if (cfg.sim.traffic_csv.empty()) {
        return synthetic_diurnal(cfg.sim.diurnal);
    }
    return traffic_from_csv(read_text(cfg.sim.traffic_csv));
}

inline nlohmann::json cohort_report(std::span<const SimTrace> traces, const PacingErrorReport& pe) {
    nlohmann::json cohorts = nlohmann::json::array();
    for (std::size_t i = 0; i < traces.size(); ++i) {
        cohorts.push_back({{"name", traces[i].name},
                           {"daily_budget", traces[i].daily_budget},
                           {"final_spend", traces[i].final_spend()},
                           {"error", pe.per_cohort_errors[i]},
                           {"weight", pe.weights[i]},
                           {"exhausted_at_s", detail::optional_json(traces[i].exhausted_at_s)}});
    }
    return {{"pe", pe.pe},
            {"swpe", pe.swpe},
            {"weighted_mean_error", pe.weighted_mean_error},
            {"excluded", pe.excluded},
            {"cohorts", std::move(cohorts)}};
}

inline SimulationOutput cmd_simulate(const RunConfig& cfg) {
    const TrafficCurve traffic = load_traffic(cfg);
    SimulationOutput out;
    const auto cohorts = cfg.cohorts(cfg.sim.use_baseline);
    out.traces = run_cohorts(cohorts, traffic);
    out.report = cohort_report(out.traces, pacing_error(std::span<const SimTrace>(out.traces)));
    out.report["controller"] = cfg.sim.use_baseline ? "baseline" : "compensator";
    if (cfg.sim.compare_baseline && !cfg.sim.use_baseline) {
        const auto base = cfg.cohorts(true);
        out.baseline_traces = run_cohorts(base, traffic);
        out.report["baseline"] =
            cohort_report(out.baseline_traces, pacing_error(std::span<const SimTrace>(out.baseline_traces)));
    }
    return out;
}

/// Writes trace_<cohort>.csv (+ trace_<cohort>_baseline.csv) and report.json into dir.
inline void write_simulation(const SimulationOutput& sim, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!std::filesystem::is_directory(dir)) {
        throw io_error("cannot create output directory " + dir.string());
    }
    for (const auto& t : sim.traces) {
        atomic_write(dir / ("trace_" + t.name + ".csv"), trace_to_csv(t));
    }
    for (const auto& t : sim.baseline_traces) {
        atomic_write(dir / ("trace_" + t.name + "_baseline.csv"), trace_to_csv(t));
    }
    atomic_write(dir / "report.json", sim.report.dump(2) + "\n");
}

// fft -----------------------------------------------------------------------

struct FftInput {
    std::optional<std::filesystem::path> traffic_csv;
    std::optional<std::filesystem::path> samples_csv;  ///< irregular stream, regularized first
};

struct FftOutput {
    Spectrum spectrum;
    std::string spectrum_csv;
    nlohmann::json summary;
};

inline FftOutput cmd_fft(const RunConfig& cfg, const FftInput& in) {
    Spectrum s;
    if (in.samples_csv) {
        const auto reg = regularize(sample_stream_from_csv(read_text(*in.samples_csv)));
        s = traffic_fft(reg.values, reg.t_sample, cfg.sim.fft_threshold);
    } else if (in.traffic_csv) {
        s = traffic_fft(traffic_from_csv(read_text(*in.traffic_csv)), cfg.sim.fft_threshold);
    } else {
        s = traffic_fft(load_traffic(cfg), cfg.sim.fft_threshold);
    }
    CsvTable t{{"freq_hz", "magnitude", "significant"}, {}};
    std::vector<bool> sig(s.freq_hz.size(), false);
    for (const auto k : s.significant_bins) {
        sig[k] = true;
    }
    for (std::size_t k = 0; k < s.freq_hz.size(); ++k) {
        t.rows.push_back({s.freq_hz[k], s.magnitude[k], sig[k] ? 1.0 : 0.0});
    }
    FftOutput out{s, to_csv(t), {}};
    out.summary = {{"max_significant_freq_hz", s.significant_bins.empty() ? nlohmann::json(nullptr)
                                                                           : nlohmann::json(s.max_significant_freq_hz)},
                   {"bin_width_hz", s.bin_width_hz},
                   {"significant_bins", s.significant_bins.size()},
                   {"threshold", cfg.sim.fft_threshold}};
    return out;
}

// discretize ----------------------------------------------------------------

inline RecurrenceCoefficients cmd_discretize(const RunConfig& cfg, std::optional<double> t_z = std::nullopt) {
    const double tz = t_z.value_or(cfg.t_z());
    return to_recurrence(tustin(cfg.compensator_tf(), tz)).coefficients(tz);
}

}  // namespace bodepace

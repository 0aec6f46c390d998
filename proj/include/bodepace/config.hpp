#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "bodepace/compensators.hpp"
#include "bodepace/errors.hpp"
#include "bodepace/io.hpp"
#include "bodepace/plant.hpp"
#include "bodepace/simulator.hpp"
#include "bodepace/stability.hpp"
#include "bodepace/traffic.hpp"

namespace bodepace {

struct BodeSettings {
    double start_hz = 1e-6;
    double stop_hz = 5e-2;
    std::size_t points = 600;
    bool closed_loop = false;  ///< also emit closed-loop rows

    friend bool operator==(const BodeSettings&, const BodeSettings&) = default;
};

struct GridSettings {
    std::vector<double> k_p_set{5e-2, 5e-3, 5e-4};
    std::vector<double> k_i_set{5e-3, 5e-4, 5e-5};
    std::vector<ZeroPoleSpec> zero_pole;

    friend bool operator==(const GridSettings&, const GridSettings&) = default;
};

enum class CohortSource {
    single,     ///< one cohort from [sim]
    reference,  ///< the seven built-in ad sets
    custom,     ///< [cohort.N] sections
};

struct CohortEntry {
    std::string name;
    double daily_budget = 0.0;
    double initial_lambda = 0.0;

    friend bool operator==(const CohortEntry&, const CohortEntry&) = default;
};

struct SimSettings {
    double daily_budget = 387.5;
    double initial_lambda = 0.05;
    double t_as = 0.87;
    double horizon_s = seconds_per_day;
    double noise_frac = 0.05;
    NoiseModel noise_model = NoiseModel::sigma_proportional;
    WnMode w_n_mode = WnMode::traffic;
    bool use_baseline = false;      ///< drive cohorts with the step controller instead of [compensator]
    bool compare_baseline = false;  ///< also run the step controller and report both
    double baseline_step = 0.01;
    CohortSource cohorts = CohortSource::single;
    bool equilibrium_scaled = true;
    std::vector<CohortEntry> custom;
    std::string traffic_csv;  ///< empty: synthetic diurnal curve
    DiurnalSpec diurnal;
    double fft_threshold = 0.01;

    friend bool operator==(const SimSettings&, const SimSettings&) = default;
};

struct RunConfig {
    PlantParams plant;  ///< w_n is the maximum of the gain envelope
    double w_n_min = 1.707;
    ZohModel zoh = ZohModel::taylor;
    std::optional<CompensatorSpec> compensator = PidSpec{5e-4, 5e-5, 0.0};  ///< unset: plant only
    AnalysisOptions analysis;
    bool require_margins = false;  ///< a missing crossover is a numerical failure
    BodeSettings bode;
    GridSettings grid;
    SimSettings sim;
    std::optional<double> t_z_s;  ///< discretization period; unset means t_ps
    std::uint64_t seed = 42;

    [[nodiscard]] PlantParams plant_max() const { return plant; }
    [[nodiscard]] PlantParams plant_min() const {
        PlantParams p = plant;
        p.w_n = w_n_min;
        return p;
    }
    [[nodiscard]] double t_z() const { return t_z_s.value_or(plant.t_ps); }

    [[nodiscard]] TransferFunction compensator_tf() const {
        return compensator ? to_transfer_function(*compensator) : TransferFunction::gain(1.0);
    }

    [[nodiscard]] CohortConfig base_cohort(bool baseline) const {
        CohortConfig c;
        c.daily_budget = sim.daily_budget;
        c.initial_lambda = sim.initial_lambda;
        c.w_n_max = plant.w_n;
        c.w_n_min = w_n_min;
        c.t_ps = plant.t_ps;
        c.t_as = sim.t_as;
        c.t_f = plant.t_f;
        c.noise_frac = sim.noise_frac;
        c.noise_model = sim.noise_model;
        c.w_n_mode = sim.w_n_mode;
        c.horizon_s = sim.horizon_s;
        c.seed = seed;
        if (baseline) {
            c.controller = BaselineSpec{sim.baseline_step};
        } else {
            detail::require(compensator.has_value(), "simulation needs a [compensator] or use_baseline = true");
            std::visit([&](const auto& s) { c.controller = s; }, *compensator);
        }
        return c;
    }

    /// Cohorts to simulate; cohort i is seeded seed + i.
    [[nodiscard]] std::vector<CohortConfig> cohorts(bool baseline) const {
        const CohortConfig base = base_cohort(baseline);
        switch (sim.cohorts) {
            case CohortSource::single:
                return {base};
            case CohortSource::reference:
                return reference_cohorts(base, sim.equilibrium_scaled);
            case CohortSource::custom:
                break;
        }
        detail::require(!sim.custom.empty(), "cohorts = custom needs at least one [cohort.N] section");
        std::vector<CohortConfig> out;
        for (std::size_t i = 0; i < sim.custom.size(); ++i) {
            CohortConfig c = base;
            c.name = sim.custom[i].name;
            c.daily_budget = sim.custom[i].daily_budget;
            c.initial_lambda = sim.custom[i].initial_lambda;
            c.seed = seed + i;
            out.push_back(std::move(c));
        }
        if (sim.equilibrium_scaled) {
            scale_to_equilibrium(out);
        }
        return out;
    }

    void validate() const {
        plant.validate();
        detail::require(w_n_min > 0.0 && w_n_min <= plant.w_n, "need 0 < w_n_min <= w_n_max");
        if (compensator) {
            std::visit([](const auto& s) { s.validate(); }, *compensator);
        }
        detail::require(analysis.sweep_start_hz > 0.0, "sweep_start_hz must be positive");
        detail::require(analysis.points_per_decade >= 1.0, "points_per_decade must be >= 1");
        detail::require(analysis.f_traffic_max_hz > 0.0, "f_traffic_max_hz must be positive");
        detail::require(bode.start_hz > 0.0 && bode.stop_hz > bode.start_hz, "need 0 < bode start_hz < stop_hz");
        detail::require(bode.points >= 2, "bode points must be >= 2");
        detail::require(!t_z_s || *t_z_s > 0.0, "t_z_s must be positive");
        detail::require(sim.fft_threshold > 0.0 && sim.fft_threshold < 1.0, "fft_threshold must lie in (0, 1)");
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

using boost::property_tree::ptree;

inline std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? ", " : "") + format_double(v[i]);
    }
    return out;
}

inline std::vector<double> split_doubles(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        out.push_back(parse_double(item, key));
    }
    return out;
}

/// Typed field access with the offending key in every error.
class Section {
public:
    Section(const ptree* node, std::string name) : node_(node), name_(std::move(name)) {}

    [[nodiscard]] std::optional<std::string> raw(const std::string& key) const {
        if (node_ == nullptr) {
            return std::nullopt;
        }
        if (auto v = node_->get_optional<std::string>(ptree::path_type(key, '\0'))) {
            return *v;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

    void get(const std::string& key, double& out) const {
        if (auto v = raw(key)) {
            out = parse_double(*v, where(key));
        }
    }
    void get(const std::string& key, std::optional<double>& out) const {
        if (auto v = raw(key)) {
            if (*v == "none" || v->empty()) {
                out.reset();
            } else {
                out = parse_double(*v, where(key));
            }
        }
    }
    void get(const std::string& key, bool& out) const {
        if (auto v = raw(key)) {
            if (*v == "true" || *v == "1" || *v == "yes") {
                out = true;
            } else if (*v == "false" || *v == "0" || *v == "no") {
                out = false;
            } else {
                throw invalid_configuration(where(key) + ": expected true or false, got '" + *v + "'");
            }
        }
    }
    template <class Int>
        requires std::is_integral_v<Int>
    void get_int(const std::string& key, Int& out) const {
        if (auto v = raw(key)) {
            const std::string_view text = trim(*v);
            Int parsed{};
            const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
            if (ec != std::errc{} || end != text.data() + text.size() || parsed < 0) {
                throw invalid_configuration(where(key) + ": expected a non-negative integer, got '" + *v + "'");
            }
            out = parsed;
        }
    }
    void get(const std::string& key, std::vector<double>& out) const {
        if (auto v = raw(key)) {
            out = split_doubles(*v, where(key));
        }
    }
    void get(const std::string& key, std::string& out) const {
        if (auto v = raw(key)) {
            out = *v;
        }
    }

private:
    const ptree* node_;
    std::string name_;
};

inline Section section(const ptree& root, const std::string& name) {
    const auto child = root.get_child_optional(ptree::path_type(name, '\0'));
    return {child ? &*child : nullptr, name};
}

template <class Enum>
Enum parse_enum(const Section& s, const std::string& key, Enum fallback,
                std::initializer_list<std::pair<const char*, Enum>> choices) {
    const auto v = s.raw(key);
    if (!v) {
        return fallback;
    }
    std::string allowed;
    for (const auto& [name, value] : choices) {
        if (*v == name) {
            return value;
        }
        allowed += (allowed.empty() ? "" : "|") + std::string(name);
    }
    throw invalid_configuration(s.where(key) + ": expected " + allowed + ", got '" + *v + "'");
}

inline ZeroPoleSpec read_zero_pole(const Section& s) {
    ZeroPoleSpec zp;
    s.get("k_c", zp.k_c);
    s.get("zeros_rad_per_s", zp.zeros);
    s.get("poles_rad_per_s", zp.poles);
    return zp;
}

/// Sections named prefix.1, prefix.2, ... in numeric order.
inline std::vector<std::string> numbered_sections(const ptree& root, const std::string& prefix) {
    std::vector<std::pair<long, std::string>> found;
    for (const auto& [name, child] : root) {
        if (name.rfind(prefix + ".", 0) == 0) {
            const std::string idx = name.substr(prefix.size() + 1);
            if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos) {
                throw invalid_configuration("section [" + name + "]: index must be a positive integer");
            }
            found.emplace_back(std::stol(idx), name);
        }
    }
    std::sort(found.begin(), found.end());
    std::vector<std::string> out;
    for (auto& f : found) {
        out.push_back(std::move(f.second));
    }
    return out;
}

}  // namespace detail

/**
 * Parse INI text. Every key is optional; omitted keys keep the defaults of
 * RunConfig. Units are part of the key names.
 */
inline RunConfig parse_run_config(const std::string& text) {
    using detail::ptree;
    ptree root;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, root);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw invalid_configuration(std::string("malformed config: ") + e.message() + " (line " +
                                    std::to_string(e.line()) + ")");
    }

    RunConfig c;
    const auto run = detail::section(root, "run");
    run.get_int("seed", c.seed);

    const auto plant = detail::section(root, "plant");
    plant.get("w_n_max_dollar_per_lambda_min", c.plant.w_n);
    plant.get("w_n_min_dollar_per_lambda_min", c.w_n_min);
    plant.get("t_ps_s", c.plant.t_ps);
    plant.get("t_f_s", c.plant.t_f);
    plant.get_int("taylor_order", c.plant.taylor_order);
    c.zoh = detail::parse_enum(plant, "zoh_model", c.zoh, {{"taylor", ZohModel::taylor}, {"exact", ZohModel::exact}});

    const auto comp = detail::section(root, "compensator");
    const std::string type = comp.raw("type").value_or("pi");
    if (type == "none") {
        c.compensator.reset();
    } else if (type == "pi" || type == "pid") {
        PidSpec p{0.0, 0.0, 0.0};
        comp.get("k_p", p.k_p);
        comp.get("k_i_per_s", p.k_i);
        comp.get("k_d_s", p.k_d);
        if (!comp.raw("k_p") && !comp.raw("k_i_per_s") && !comp.raw("k_d_s")) {
            p = PidSpec{5e-4, 5e-5, 0.0};
        }
        c.compensator = p;
    } else if (type == "zero_pole") {
        c.compensator = detail::read_zero_pole(comp);
    } else {
        throw invalid_configuration("[compensator] type: expected none|pi|pid|zero_pole, got '" + type + "'");
    }

    const auto an = detail::section(root, "analysis");
    an.get("sweep_start_hz", c.analysis.sweep_start_hz);
    an.get("points_per_decade", c.analysis.points_per_decade);
    an.get("margin_ceiling_hz", c.analysis.search_ceiling_hz);
    an.get("bisection_rel_tol", c.analysis.bisection_rel_tol);
    an.get("f_traffic_max_hz", c.analysis.f_traffic_max_hz);
    an.get("require_margins", c.require_margins);

    const auto bode = detail::section(root, "bode");
    bode.get("start_hz", c.bode.start_hz);
    bode.get("stop_hz", c.bode.stop_hz);
    bode.get_int("points", c.bode.points);
    bode.get("closed_loop", c.bode.closed_loop);

    const auto grid = detail::section(root, "grid");
    grid.get("k_p_set", c.grid.k_p_set);
    grid.get("k_i_set", c.grid.k_i_set);
    for (const auto& name : detail::numbered_sections(root, "grid.zero_pole")) {
        c.grid.zero_pole.push_back(detail::read_zero_pole(detail::section(root, name)));
    }

    const auto sim = detail::section(root, "sim");
    sim.get("daily_budget_dollar", c.sim.daily_budget);
    sim.get("initial_lambda", c.sim.initial_lambda);
    sim.get("t_as_s", c.sim.t_as);
    sim.get("horizon_s", c.sim.horizon_s);
    sim.get("noise_frac", c.sim.noise_frac);
    c.sim.noise_model = detail::parse_enum(sim, "noise_model", c.sim.noise_model,
                                           {{"sigma_proportional", NoiseModel::sigma_proportional},
                                            {"variance_proportional", NoiseModel::variance_proportional}});
    c.sim.w_n_mode = detail::parse_enum(sim, "w_n_mode", c.sim.w_n_mode,
                                        {{"traffic", WnMode::traffic}, {"max", WnMode::max}, {"min", WnMode::min}});
    sim.get("use_baseline", c.sim.use_baseline);
    sim.get("compare_baseline", c.sim.compare_baseline);
    sim.get("baseline_step", c.sim.baseline_step);
    c.sim.cohorts = detail::parse_enum(
        sim, "cohorts", c.sim.cohorts,
        {{"single", CohortSource::single}, {"reference", CohortSource::reference}, {"custom", CohortSource::custom}});
    sim.get("equilibrium_scaled", c.sim.equilibrium_scaled);
    sim.get("traffic_csv", c.sim.traffic_csv);
    sim.get_int("diurnal_harmonics", c.sim.diurnal.harmonics);
    sim.get("diurnal_resolution_s", c.sim.diurnal.resolution_s);
    sim.get("diurnal_peak_time_s", c.sim.diurnal.peak_time_s);
    sim.get("diurnal_floor_frac", c.sim.diurnal.floor_frac);
    sim.get("fft_threshold", c.sim.fft_threshold);
    for (const auto& name : detail::numbered_sections(root, "cohort")) {
        const auto s = detail::section(root, name);
        CohortEntry e{name.substr(std::string("cohort.").size()), 0.0, 0.0};
        s.get("name", e.name);
        s.get("daily_budget_dollar", e.daily_budget);
        s.get("initial_lambda", e.initial_lambda);
        c.sim.custom.push_back(std::move(e));
    }

    detail::section(root, "discretize").get("t_z_s", c.t_z_s);
    c.validate();
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw io_error("config file not found: " + path.string());
    }
    return parse_run_config(read_text(path));
}

/// Inverse of parse_run_config: every field written, doubles in round-trip form.
inline std::string format_run_config(const RunConfig& c) {
    std::ostringstream o;
    auto d = [](double v) { return format_double(v); };
    auto b = [](bool v) { return v ? "true" : "false"; };
    o << "[run]\nseed = " << c.seed << "\n\n";
    o << "[plant]\nw_n_max_dollar_per_lambda_min = " << d(c.plant.w_n)
      << "\nw_n_min_dollar_per_lambda_min = " << d(c.w_n_min) << "\nt_ps_s = " << d(c.plant.t_ps)
      << "\nt_f_s = " << d(c.plant.t_f) << "\ntaylor_order = " << c.plant.taylor_order
      << "\nzoh_model = " << (c.zoh == ZohModel::exact ? "exact" : "taylor") << "\n\n";

    o << "[compensator]\n";
    auto zero_pole_lines = [&](const ZeroPoleSpec& zp) {
        o << "k_c = " << d(zp.k_c) << "\nzeros_rad_per_s = " << detail::join(zp.zeros)
          << "\npoles_rad_per_s = " << detail::join(zp.poles) << "\n";
    };
    if (!c.compensator) {
        o << "type = none\n";
    } else if (const auto* p = std::get_if<PidSpec>(&*c.compensator)) {
        o << "type = pi\nk_p = " << d(p->k_p) << "\nk_i_per_s = " << d(p->k_i) << "\nk_d_s = " << d(p->k_d) << "\n";
    } else {
        o << "type = zero_pole\n";
        zero_pole_lines(std::get<ZeroPoleSpec>(*c.compensator));
    }

    o << "\n[analysis]\nsweep_start_hz = " << d(c.analysis.sweep_start_hz)
      << "\npoints_per_decade = " << d(c.analysis.points_per_decade) << "\nmargin_ceiling_hz = "
      << (c.analysis.search_ceiling_hz ? d(*c.analysis.search_ceiling_hz) : std::string("none"))
      << "\nbisection_rel_tol = " << d(c.analysis.bisection_rel_tol)
      << "\nf_traffic_max_hz = " << d(c.analysis.f_traffic_max_hz) << "\nrequire_margins = " << b(c.require_margins)
      << "\n\n";

    o << "[bode]\nstart_hz = " << d(c.bode.start_hz) << "\nstop_hz = " << d(c.bode.stop_hz)
      << "\npoints = " << c.bode.points << "\nclosed_loop = " << b(c.bode.closed_loop) << "\n\n";

    o << "[grid]\nk_p_set = " << detail::join(c.grid.k_p_set) << "\nk_i_set = " << detail::join(c.grid.k_i_set)
      << "\n\n";
    for (std::size_t i = 0; i < c.grid.zero_pole.size(); ++i) {
        o << "[grid.zero_pole." << i + 1 << "]\n";
        zero_pole_lines(c.grid.zero_pole[i]);
        o << "\n";
    }

    const auto& s = c.sim;
    o << "[sim]\ndaily_budget_dollar = " << d(s.daily_budget) << "\ninitial_lambda = " << d(s.initial_lambda)
      << "\nt_as_s = " << d(s.t_as) << "\nhorizon_s = " << d(s.horizon_s) << "\nnoise_frac = " << d(s.noise_frac)
      << "\nnoise_model = "
      << (s.noise_model == NoiseModel::sigma_proportional ? "sigma_proportional" : "variance_proportional")
      << "\nw_n_mode = " << (s.w_n_mode == WnMode::traffic ? "traffic" : s.w_n_mode == WnMode::max ? "max" : "min")
      << "\nuse_baseline = " << b(s.use_baseline) << "\ncompare_baseline = " << b(s.compare_baseline)
      << "\nbaseline_step = " << d(s.baseline_step) << "\ncohorts = "
      << (s.cohorts == CohortSource::single ? "single" : s.cohorts == CohortSource::reference ? "reference" : "custom")
      << "\nequilibrium_scaled = " << b(s.equilibrium_scaled) << "\ntraffic_csv = " << s.traffic_csv
      << "\ndiurnal_harmonics = " << s.diurnal.harmonics << "\ndiurnal_resolution_s = " << d(s.diurnal.resolution_s)
      << "\ndiurnal_peak_time_s = " << d(s.diurnal.peak_time_s)
      << "\ndiurnal_floor_frac = " << d(s.diurnal.floor_frac) << "\nfft_threshold = " << d(s.fft_threshold)
      << "\n\n";
    for (std::size_t i = 0; i < s.custom.size(); ++i) {
        o << "[cohort." << i + 1 << "]\nname = " << s.custom[i].name
          << "\ndaily_budget_dollar = " << d(s.custom[i].daily_budget)
          << "\ninitial_lambda = " << d(s.custom[i].initial_lambda) << "\n\n";
    }
    o << "[discretize]\nt_z_s = " << (c.t_z_s ? d(*c.t_z_s) : std::string("none")) << "\n";
    return o.str();
}

}  // namespace bodepace

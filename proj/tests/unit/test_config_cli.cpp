#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "bodepace/commands.hpp"
#include "bodepace/config.hpp"

using namespace bodepace;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("bodepace_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BODEPACE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string config(const std::string& name) { return std::string(BODEPACE_CONFIG_DIR) + "/" + name; }

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST(Config, DefaultsWhenEmpty) { EXPECT_TRUE(parse_run_config("") == RunConfig{}); }

TEST(Config, ParsesUnitsInKeyNames) {
    const auto c = parse_run_config(
        "[plant]\nw_n_max_dollar_per_lambda_min = 20\nt_ps_s = 5\n[compensator]\ntype = pi\nk_p = 1e-3\nk_i_per_s = 2e-4\n"
        "[analysis]\nmargin_ceiling_hz = 0.1\n");
    EXPECT_DOUBLE_EQ(c.plant.w_n, 20.0);
    EXPECT_DOUBLE_EQ(c.plant.t_ps, 5.0);
    EXPECT_DOUBLE_EQ(std::get<PidSpec>(*c.compensator).k_i, 2e-4);
    EXPECT_DOUBLE_EQ(*c.analysis.search_ceiling_hz, 0.1);
}

TEST(Config, FieldLevelErrors) {
    try {
        parse_run_config("[plant]\nt_ps_s = ten\n");
        FAIL();
    } catch (const invalid_configuration& e) {
        EXPECT_NE(std::string(e.what()).find("t_ps_s"), std::string::npos);
    }
    EXPECT_THROW(parse_run_config("[compensator]\ntype = lead\n"), invalid_configuration);
    EXPECT_THROW(parse_run_config("[plant]\nw_n_max_dollar_per_lambda_min = -1\n"), invalid_configuration);
    EXPECT_THROW(parse_run_config("[sim]\nw_n_mode = sometimes\n"), invalid_configuration);
    EXPECT_THROW(load_run_config("/nonexistent/bodepace.ini"), io_error);
}

TEST(Config, RoundTripShippedConfigs) {
    for (const auto* name : {"table1.ini", "plant_only.ini", "sim.ini", "discretize.ini"}) {
        const auto c = load_run_config(config(name));
        EXPECT_TRUE(parse_run_config(format_run_config(c)) == c) << name;
    }
}

TEST(Config, RoundTripRandomized) {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        RunConfig c;
        c.seed = rng();
        c.plant.w_n = 5.0 + u(rng);
        c.w_n_min = u(rng) / 10.0;
        c.plant.t_f = u(rng);
        c.plant.taylor_order = 2 + trial % 10;
        c.zoh = trial % 2 ? ZohModel::exact : ZohModel::taylor;
        switch (trial % 3) {
            case 0: c.compensator = PidSpec{u(rng) * 1e-4, u(rng) * 1e-5, trial % 4 ? 0.0 : u(rng)}; break;
            case 1: c.compensator = ZeroPoleSpec{u(rng), {u(rng)}, {u(rng) * 1e-3, u(rng) * 1e-2}}; break;
            default: c.compensator.reset();
        }
        c.analysis.search_ceiling_hz = trial % 2 ? std::optional<double>(u(rng) / 100.0) : std::nullopt;
        c.bode.points = 10 + trial;
        c.bode.closed_loop = trial % 2;
        c.grid.k_p_set = {u(rng), u(rng)};
        c.grid.zero_pole = {ZeroPoleSpec{1.0, {0.1}, {1e-4}}};
        c.sim.noise_frac = u(rng) / 100.0;
        c.sim.cohorts = static_cast<CohortSource>(trial % 3);
        c.sim.custom = {{"alpha", u(rng), 0.1}, {"beta", u(rng), 0.2}};
        c.sim.w_n_mode = static_cast<WnMode>(trial % 3);
        c.t_z_s = trial % 2 ? std::optional<double>(u(rng)) : std::nullopt;
        EXPECT_TRUE(parse_run_config(format_run_config(c)) == c) << format_run_config(c);
    }
}

TEST(Commands, BodeRowCount) {
    RunConfig c;
    const auto out = cmd_bode(c);
    EXPECT_EQ(count_lines(out.open_loop_csv), 601u);
    const auto t = parse_csv(out.open_loop_csv, bode_csv_header());
    EXPECT_EQ(t.rows.size(), 600u);
}

TEST(Commands, BodeConstantGain) {
    RunConfig c;
    c.compensator.reset();
    c.plant = {20.0, 1.0, 1e-12, 10};
    c.bode = {1e-12, 1e-11, 10, false};  // far below the hold lag of -180·f·T degrees
    const auto t = parse_csv(cmd_bode(c).open_loop_csv, bode_csv_header());
    for (const auto& r : t.rows) {
        EXPECT_NEAR(r[1], 26.0206, 1e-4);
        EXPECT_NEAR(r[2], 0.0, 1e-6);
    }
}

TEST(Commands, MarginsAnchor) {
    const auto j = cmd_margins(load_run_config(config("table1.ini")));
    EXPECT_NEAR(j.at("gm_db").get<double>(), 37.33, 0.01);
    EXPECT_NEAR(j.at("pm_deg").get<double>(), 91.32, 0.01);
    EXPECT_TRUE(j.at("feasible").get<bool>());
}

TEST(Commands, MarginsPlantOnlyNegative) {
    const auto j = cmd_margins(load_run_config(config("plant_only.ini")));
    EXPECT_LT(j.at("gm_db").get<double>(), 0.0);
    EXPECT_LT(j.at("pm_deg").get<double>(), 0.0);
}

TEST(Commands, GridsearchHasTwelveRowsAndSignRule) {
    const auto csv = cmd_gridsearch(load_run_config(config("table1.ini")));
    EXPECT_EQ(count_lines(csv), 13u);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto cells = split_csv_line(line);
        ASSERT_EQ(cells.size(), 14u);
        const bool feasible = cells[13] == "1";
        const double gm = parse_double(cells[5], "gm"), pm = parse_double(cells[6], "pm");
        EXPECT_EQ(feasible, gm > 0.0 && pm > 0.0) << line;
    }
}

TEST(Commands, DiscretizeZeroPole) {
    const auto c = cmd_discretize(load_run_config(config("discretize.ini")));
    EXPECT_DOUBLE_EQ(c.t_z, 10.0);
    ASSERT_EQ(c.a.size(), 1u);
    EXPECT_NEAR(c.a[0], 0.999000499750125, 1e-15);
}

TEST(Commands, RequireMarginsRaisesNumericalFailure) {
    RunConfig c;
    c.compensator.reset();
    c.plant.w_n = 0.01;
    c.w_n_min = 0.005;
    c.require_margins = true;
    EXPECT_THROW(cmd_margins(c), numerical_failure);
}

TEST(Io, AtomicWriteReplacesAndLeavesNoTemp) {
    const auto d = scratch_dir("atomic");
    atomic_write(d / "a.txt", "one");
    atomic_write(d / "a.txt", "two");
    EXPECT_EQ(read_text(d / "a.txt"), "two");
    EXPECT_EQ(std::distance(fs::directory_iterator(d), fs::directory_iterator()), 1);
    EXPECT_THROW(atomic_write(d / "missing" / "a.txt", "x"), io_error);
}

TEST(Cli, BodeWritesSixHundredRows) {
    const auto d = scratch_dir("bode");
    ASSERT_EQ(run_cli("--config " + config("table1.ini") + " --out " + (d / "b.csv").string() + " bode"), 0);
    EXPECT_EQ(count_lines(read_text(d / "b.csv")), 601u);
}

TEST(Cli, EmptyKiSetIsConfigErrorWithoutOutput) {
    const auto d = scratch_dir("empty_ki");
    write_file(d / "bad.ini", "[grid]\nk_p_set = 5e-4\nk_i_set =\n");
    EXPECT_EQ(run_cli("--config " + (d / "bad.ini").string() + " --out " + (d / "g.csv").string() + " gridsearch"), 2);
    EXPECT_FALSE(fs::exists(d / "g.csv"));
}

TEST(Cli, MarginsDeterministic) {
    const auto d = scratch_dir("margins");
    const std::string base = "--config " + config("table1.ini") + " --out ";
    ASSERT_EQ(run_cli(base + (d / "m1.json").string() + " margins"), 0);
    ASSERT_EQ(run_cli(base + (d / "m2.json").string() + " margins"), 0);
    EXPECT_EQ(read_text(d / "m1.json"), read_text(d / "m2.json"));
}

TEST(Cli, ExitCodes) {
    const auto d = scratch_dir("codes");
    write_file(d / "bad.ini", "[plant]\nt_ps_s = -1\n");
    EXPECT_EQ(run_cli("--config " + (d / "bad.ini").string() + " margins"), 2);
    EXPECT_EQ(run_cli("margins --bogus"), 2);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("--config " + config("table1.ini") + " --out /nonexistent/dir/x.csv bode"), 4);
    write_file(d / "flat.ini", "[compensator]\ntype = none\n[plant]\nw_n_max_dollar_per_lambda_min = 0.01\n"
                               "w_n_min_dollar_per_lambda_min = 0.005\n[analysis]\nrequire_margins = true\n");
    EXPECT_EQ(run_cli("--config " + (d / "flat.ini").string() + " margins"), 3);
    EXPECT_EQ(run_cli("--config " + config("discretize.ini") + " discretize"), 0);
}

TEST(Cli, SimulateReproducible) {
    const auto d = scratch_dir("sim");
    write_file(d / "short.ini", "[sim]\nhorizon_s = 7200\ncompare_baseline = true\n");
    const std::string base = "--config " + (d / "short.ini").string() + " --seed 7 --out ";
    ASSERT_EQ(run_cli(base + (d / "a").string() + " simulate"), 0);
    ASSERT_EQ(run_cli(base + (d / "b").string() + " simulate"), 0);
    for (const auto* f : {"trace_cohort.csv", "trace_cohort_baseline.csv", "report.json"}) {
        EXPECT_EQ(read_text(d / "a" / f), read_text(d / "b" / f)) << f;
    }
    const auto tr = trace_from_csv(read_text(d / "a" / "trace_cohort.csv"), 387.5);
    EXPECT_EQ(tr.rows.size(), 720u);
    const auto report = nlohmann::json::parse(read_text(d / "a" / "report.json"));
    EXPECT_TRUE(report.contains("baseline"));
}

TEST(Cli, FftFromTrafficCsv) {
    const auto d = scratch_dir("fft");
    write_file(d / "traffic.csv", traffic_to_csv(synthetic_diurnal()));
    ASSERT_EQ(run_cli("--out " + (d / "s.csv").string() + " fft --traffic " + (d / "traffic.csv").string()), 0);
    const auto t = parse_csv(read_text(d / "s.csv"), {"freq_hz", "magnitude", "significant"});
    double max_sig = 0.0;
    for (const auto& r : t.rows) {
        if (r[2] == 1.0) max_sig = r[0];
    }
    EXPECT_NEAR(max_sig, 8.0 / 86400.0, 1.0 / 86400.0);
}

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "bodepace/commands.hpp"

namespace {

enum ExitCode : int { ok = 0, config_error = 2, numerical_error = 3, io_failure = 4 };

void emit(const std::optional<std::string>& out, const std::string& text) {
    if (out) {
        bodepace::atomic_write(*out, text);
    } else {
        std::cout << text;
    }
}

std::filesystem::path sibling(const std::filesystem::path& p, const std::string& suffix) {
    auto q = p;
    q.replace_filename(p.stem().string() + suffix + p.extension().string());
    return q;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bode-based budget pacing toolkit"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::string format = "json";
    app.add_option("--config", config_path, "INI run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out, "output file (directory for simulate)");
    app.add_option("--seed", seed, "override [run] seed");
    app.add_option("--format", format, "csv or json for stdout summaries")
                    ->check(CLI::IsMember({"csv", "json"}));
    app.fallthrough();

    auto* bode = app.add_subcommand("bode", "open-loop (and closed-loop) frequency response CSV");
    auto* margins = app.add_subcommand("margins", "GM, PM, COG and CL-BW at both W_n extremes");
    auto* grid = app.add_subcommand("gridsearch", "PI grid and zero-pole cells, one CSV row each");
    auto* simulate = app.add_subcommand("simulate", "closed-loop day simulation; traces and report.json");
    auto* fft = app.add_subcommand("fft", "traffic spectrum CSV and max significant frequency");
    std::optional<std::string> traffic_csv;
    std::optional<std::string> samples_csv;
    fft->add_option("--traffic", traffic_csv, "uniform traffic CSV (time_s,intensity)");
    fft->add_option("--samples", samples_csv, "irregular stream CSV (timestamp_s,spend_velocity)");
    auto* disc = app.add_subcommand("discretize", "Tustin recurrence coefficients JSON");
    std::optional<double> t_z;
    disc->add_option("--t-z", t_z, "sampling period in seconds (default [discretize] t_z_s or t_ps)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : config_error;
    }

    try {
        bodepace::RunConfig cfg = config_path ? bodepace::load_run_config(*config_path) : bodepace::RunConfig{};
        if (seed) {
            cfg.seed = *seed;
        }
        const bool csv = format == "csv";

        if (bode->parsed()) {
            const auto res = bodepace::cmd_bode(cfg);
            emit(out, res.open_loop_csv);
            if (res.closed_loop_csv) {
                if (out) {
                    bodepace::atomic_write(sibling(*out, "_closed"), *res.closed_loop_csv);
                } else {
                    std::cout << "\n" << *res.closed_loop_csv;
                }
            }
        } else if (margins->parsed()) {
            const auto j = bodepace::cmd_margins(cfg);
            emit(out, csv ? bodepace::margins_csv(j) : j.dump(2) + "\n");
        } else if (grid->parsed()) {
            emit(out, bodepace::cmd_gridsearch(cfg));
        } else if (simulate->parsed()) {
            const auto res = bodepace::cmd_simulate(cfg);
            bodepace::write_simulation(res, out.value_or("sim_out"));
            std::cout << res.report.dump(2) << "\n";
        } else if (fft->parsed()) {
            bodepace::FftInput in;
            if (traffic_csv) {
                in.traffic_csv = *traffic_csv;
            }
            if (samples_csv) {
                in.samples_csv = *samples_csv;
            }
            const auto res = bodepace::cmd_fft(cfg, in);
            emit(out, res.spectrum_csv);
            if (out) {
                if (csv) {
                    std::cout << "max_significant_freq_hz,bin_width_hz\n"
                              << (res.spectrum.significant_bins.empty()
                                      ? std::string("nan")
                                      : bodepace::format_double(res.spectrum.max_significant_freq_hz))
                              << "," << bodepace::format_double(res.spectrum.bin_width_hz) << "\n";
                } else {
                    std::cout << res.summary.dump(2) << "\n";
                }
            }
        } else if (disc->parsed()) {
            const auto c = bodepace::cmd_discretize(cfg, t_z);
            emit(out, nlohmann::json(c).dump(2) + "\n");
        }
    } catch (const bodepace::invalid_configuration& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const bodepace::io_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return io_failure;
    } catch (const bodepace::numerical_failure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical_error;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return io_failure;
    }
    return ok;
}

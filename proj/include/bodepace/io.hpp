#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "bodepace/errors.hpp"
#include "bodepace/sensing_filters.hpp"
#include "bodepace/traffic.hpp"

namespace bodepace {

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

inline double parse_double(std::string_view text, std::string_view what) {
    text = trim(text);
    if (text == "nan") {
        return std::nan("");
    }
    if (text == "inf" || text == "-inf") {
        return text.front() == '-' ? -HUGE_VAL : HUGE_VAL;
    }
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw invalid_configuration("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
    }
    return v;
}

/// Write via a sibling temp file and rename, so readers never see a partial file.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    const auto parent = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    std::error_code ec;
    if (!std::filesystem::is_directory(parent, ec)) {
        throw io_error("output directory does not exist: " + parent.string());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw io_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp, ec);
            throw io_error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw io_error("cannot rename into " + path.string());
    }
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Numeric CSV with a fixed header. Blank lines are skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        std::string cell(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
            cell.pop_back();
        }
        out.push_back(std::move(cell));
        if (comma == std::string_view::npos) {
            return out;
        }
        start = comma + 1;
    }
}

inline CsvTable parse_csv(std::string_view text, const std::vector<std::string>& expected_header) {
    CsvTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") {
            continue;
        }
        auto cells = split_csv_line(line);
        if (!have_header) {
            if (cells != expected_header) {
                throw invalid_configuration("unexpected CSV header on line " + std::to_string(lineno));
            }
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != expected_header.size()) {
            throw invalid_configuration("wrong column count on CSV line " + std::to_string(lineno));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            row.push_back(parse_double(c, "CSV line " + std::to_string(lineno)));
        }
        table.rows.push_back(std::move(row));
    }
    if (!have_header) {
        throw invalid_configuration("CSV input is empty");
    }
    return table;
}

inline std::string to_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        out += (i ? "," : "") + table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out += ',';
            }
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline const std::vector<std::string>& traffic_csv_header() {
    static const std::vector<std::string> h{"time_s", "intensity"};
    return h;
}

inline std::string traffic_to_csv(const TrafficCurve& curve) {
    CsvTable t{traffic_csv_header(), {}};
    for (std::size_t i = 0; i < curve.size(); ++i) {
        t.rows.push_back({static_cast<double>(i) * curve.resolution_s(), curve.intensities()[i]});
    }
    return to_csv(t);
}

/// Rows must start at t = 0 and be uniformly spaced; irregular data goes through `regularize` first.
inline TrafficCurve traffic_from_csv(std::string_view text) {
    const auto t = parse_csv(text, traffic_csv_header());
    detail::require(t.rows.size() >= 2, "traffic CSV needs at least two rows");
    const double res = t.rows[1][0] - t.rows[0][0];
    detail::require(res > 0.0, "traffic timestamps must increase");
    std::vector<double> v;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double expected = t.rows[0][0] + static_cast<double>(i) * res;
        if (std::abs(t.rows[i][0] - expected) > 1e-6 * res) {
            throw invalid_configuration("traffic CSV is not uniformly sampled (row " + std::to_string(i + 2) +
                                        "); regularize it first");
        }
        v.push_back(t.rows[i][1]);
    }
    return {std::move(v), res};
}

inline const std::vector<std::string>& sample_stream_csv_header() {
    static const std::vector<std::string> h{"timestamp_s", "spend_velocity"};
    return h;
}

inline SampleStream sample_stream_from_csv(std::string_view text) {
    const auto t = parse_csv(text, sample_stream_csv_header());
    SampleStream s;
    for (const auto& r : t.rows) {
        s.timestamps.push_back(r[0]);
        s.values.push_back(r[1]);
    }
    s.validate();
    return s;
}

}  // namespace bodepace

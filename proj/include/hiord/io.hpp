#pragma once

// Trajectory export: CSV with 17 significant digits (exact round trip),
// two-column plot series and a gnuplot driver script.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "engine.hpp"
#include "error.hpp"

namespace hiord {

/// Decimal form with 17 significant digits; parses back to the same double.
inline std::string format_double(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    require(res.ec == std::errc(), "format_double: conversion failed");
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    require(res.ec == std::errc() && res.ptr == s.data() + s.size(), "parse_double: malformed number '" + std::string(s) + "'");
    return x;
}

/// time, graph, x_1_1 .. x_N_m, then s_1_1 .. s_N_m when observers are recorded.
inline std::vector<std::string> csv_header(const Trajectory& tr) {
    std::vector<std::string> h{"time", "graph"};
    for (int i = 1; i <= tr.agents; ++i)
        for (int k = 1; k <= tr.order; ++k) h.push_back("x_" + std::to_string(i) + "_" + std::to_string(k));
    if (tr.has_observers())
        for (int i = 1; i <= tr.agents; ++i)
            for (int k = 1; k <= tr.order; ++k) h.push_back("s_" + std::to_string(i) + "_" + std::to_string(k));
    return h;
}

/// Graph indices are written one-based, matching config files.
inline void write_csv(std::ostream& out, const Trajectory& tr) {
    const auto header = csv_header(tr);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (std::size_t k = 0; k < tr.size(); ++k) {
        out << format_double(tr.times[k]) << ',' << tr.graph_index[k] + 1;
        for (Eigen::Index j = 0; j < tr.states[k].size(); ++j) out << ',' << format_double(tr.states[k](j));
        if (tr.has_observers())
            for (Eigen::Index j = 0; j < tr.observers[k].size(); ++j) out << ',' << format_double(tr.observers[k](j));
        out << '\n';
    }
}

inline void write_csv(const std::filesystem::path& path, const Trajectory& tr) {
    std::ofstream out(path);
    require(static_cast<bool>(out), "cannot write '" + path.string() + "'");
    write_csv(out, tr);
    require(static_cast<bool>(out), "write failed for '" + path.string() + "'");
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t b = 0;
    for (;;) {
        const auto e = line.find(',', b);
        out.push_back(line.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
        if (e == std::string_view::npos) return out;
        b = e + 1;
    }
}

}  // namespace detail

/// Reads a file produced by write_csv; agents and order come from the header.
inline Trajectory read_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "read_csv: missing header");
    const auto header = detail::split_commas(line);
    require(header.size() >= 3 && header[0] == "time" && header[1] == "graph", "read_csv: unexpected header");

    Trajectory tr;
    std::size_t xs = 0, ss = 0;
    int agents = 0, order = 0;
    for (std::size_t c = 2; c < header.size(); ++c) {
        const auto h = header[c];
        require(h.size() > 2 && (h[0] == 'x' || h[0] == 's') && h[1] == '_', "read_csv: bad column '" + std::string(h) + "'");
        const auto us = h.find('_', 2);
        require(us != std::string_view::npos, "read_csv: bad column '" + std::string(h) + "'");
        const int i = static_cast<int>(parse_double(h.substr(2, us - 2)));
        const int k = static_cast<int>(parse_double(h.substr(us + 1)));
        if (h[0] == 'x') {
            ++xs;
            agents = std::max(agents, i);
            order = std::max(order, k);
        } else {
            ++ss;
        }
    }
    require(static_cast<std::size_t>(agents) * order == xs && (ss == 0 || ss == xs), "read_csv: inconsistent columns");
    tr.agents = agents;
    tr.order = order;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_commas(line);
        require(cells.size() == header.size(), "read_csv: row has " + std::to_string(cells.size()) + " cells, expected " +
                                                   std::to_string(header.size()));
        tr.times.push_back(parse_double(cells[0]));
        tr.graph_index.push_back(static_cast<int>(parse_double(cells[1])) - 1);
        Vector X(static_cast<Eigen::Index>(xs));
        for (std::size_t j = 0; j < xs; ++j) X(static_cast<Eigen::Index>(j)) = parse_double(cells[2 + j]);
        tr.states.push_back(std::move(X));
        if (ss) {
            Vector S(static_cast<Eigen::Index>(ss));
            for (std::size_t j = 0; j < ss; ++j) S(static_cast<Eigen::Index>(j)) = parse_double(cells[2 + xs + j]);
            tr.observers.push_back(std::move(S));
        }
    }
    return tr;
}

inline Trajectory read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot read '" + path.string() + "'");
    return read_csv(in);
}

struct PlotSeries {
    std::string file;   // relative to the plot directory
    std::string group;  // panel the series belongs to
    std::string label;
};

/**
 * Writes one two-column (time, value) file per agent and component under
 * `dir`, plus joint angles for robot runs and observer estimates when
 * recorded. Returns the series written.
 */
inline std::vector<PlotSeries> write_plot_data(const std::filesystem::path& dir, const Trajectory& tr) {
    std::filesystem::create_directories(dir);
    std::vector<PlotSeries> out;
    auto emit = [&](const std::string& name, const std::string& group, const std::string& label, auto&& value_at) {
        std::ofstream f(dir / name);
        require(static_cast<bool>(f), "cannot write '" + (dir / name).string() + "'");
        for (std::size_t k = 0; k < tr.size(); ++k) f << format_double(tr.times[k]) << ' ' << format_double(value_at(k)) << '\n';
        out.push_back({name, group, label});
    };
    const int m = tr.order;
    for (int i = 0; i < tr.agents; ++i)
        for (int c = 0; c < m; ++c) {
            const auto tag = std::to_string(i + 1) + "_" + std::to_string(c + 1);
            emit("x_" + tag + ".dat", "x" + std::to_string(c + 1), "agent " + std::to_string(i + 1),
                 [&](std::size_t k) { return tr.states[k](i * m + c); });
        }
    if (tr.has_observers())
        for (int i = 0; i < tr.agents; ++i)
            for (int c = 0; c < m; ++c) {
                const auto tag = std::to_string(i + 1) + "_" + std::to_string(c + 1);
                emit("s_" + tag + ".dat", "s" + std::to_string(c + 1), "agent " + std::to_string(i + 1),
                     [&](std::size_t k) { return tr.observers[k](i * m + c); });
            }
    if (!tr.physical.empty())
        for (int i = 0; i < tr.agents; ++i) {
            emit("q1_" + std::to_string(i + 1) + ".dat", "q1", "agent " + std::to_string(i + 1),
                 [&](std::size_t k) { return tr.physical[k](i * 4 + 0); });
            emit("q2_" + std::to_string(i + 1) + ".dat", "q2", "agent " + std::to_string(i + 1),
                 [&](std::size_t k) { return tr.physical[k](i * 4 + 2); });
        }
    return out;
}

/// gnuplot script drawing one PNG per series group.
inline std::string gnuplot_script(const std::vector<PlotSeries>& series, bool discrete) {
    std::ostringstream s;
    s << "# gnuplot -c plot.gp   (run inside this directory)\n";
    s << "set terminal pngcairo size 900,500\n";
    s << "set xlabel '" << (discrete ? "k" : "t [s]") << "'\n";
    s << "set key outside right\n";
    std::vector<std::string> groups;
    for (const auto& p : series)
        if (std::find(groups.begin(), groups.end(), p.group) == groups.end()) groups.push_back(p.group);
    for (const auto& g : groups) {
        s << "\nset output '" << g << ".png'\nset ylabel '" << g << "'\nplot";
        bool first = true;
        for (const auto& p : series) {
            if (p.group != g) continue;
            s << (first ? " " : ", \\\n     ") << "'" << p.file << "' using 1:2 with " << (discrete ? "steps" : "lines")
              << " title '" << p.label << "'";
            first = false;
        }
        s << '\n';
    }
    return s.str();
}

}  // namespace hiord

// hiord: run consensus scenarios, invariant suites and topology checks.
//
//   hiord run <name|path> [--dt DT] [--duration T] [--seed S] [--tol TOL]
//                         [--override key=value]... [--out DIR]
//   hiord check <suite|all> [--seed S]
//   hiord verify-topology <name|path> --window T [--failures-only]
//   hiord list
//
// Exit status: 0 success, 1 a run check or suite failed, 2 usage or config
// error, 3 the simulation diverged.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hiord/hiord.hpp"
#include "hiord/summary.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct Source {
    std::string arg;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
};

/// Built-in name unless a file of that name exists.
hiord::Scenario load_scenario(const Source& src) {
    if (hiord::is_builtin_scenario(src.arg) && !fs::exists(src.arg)) {
        hiord::Scenario sc = hiord::builtin_scenario(src.arg, src.seed.value_or(1));
        for (const auto& o : src.overrides) {
            const auto [key, value] = hiord::parse_override(o);
            hiord::apply_override(sc, key, value);
        }
        return sc;
    }
    if (!fs::exists(src.arg))
        throw hiord::Error("'" + src.arg + "' is neither a built-in scenario nor a readable config file");
    hiord::config::Table root = hiord::config::parse_file(src.arg);
    for (const auto& o : src.overrides) {
        auto [key, value] = hiord::parse_override(o);
        hiord::config::set_entry(root, key, std::move(value));
    }
    try {
        hiord::Scenario sc = hiord::scenario_from_config(root, src.seed);
        if (sc.name.empty()) sc.name = fs::path(src.arg).stem().string();
        return sc;
    } catch (const hiord::config::ParseError& e) {
        throw hiord::config::ParseError(e.position(), e.message(), src.arg);
    }
}

fs::path output_root(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("HIORD_OUT"); env && *env) return env;
    return "runs";
}

int cmd_run(const Source& src, std::optional<double> dt, std::optional<double> duration, std::optional<double> tol,
            const std::string& out_flag, bool plots) {
    hiord::Scenario sc = load_scenario(src);
    hiord::config::Value v;
    auto set = [&](const char* key, double x) {
        v.data = hiord::config::Number{x, false};
        hiord::apply_override(sc, key, v);
    };
    if (dt) set("dt", *dt);
    if (duration) set("duration", *duration);
    if (tol) set("tol", *tol);
    sc.validate();

    const fs::path dir = output_root(out_flag) / sc.name;
    fs::create_directories(dir);
    const hiord::Trajectory tr = hiord::simulate(sc);
    const hiord::RunReport rep = hiord::analyze_run(sc, tr);

    hiord::write_csv(dir / "trajectory.csv", tr);
    hiord::write_summary(dir / "summary.json", hiord::summary_json(sc, tr, rep));
    if (plots) {
        const auto series = hiord::write_plot_data(dir / "plots", tr);
        std::ofstream gp(dir / "plots" / "plot.gp");
        gp << hiord::gnuplot_script(series, tr.discrete);
    }

    std::cout << "scenario " << sc.name << " (" << hiord::to_string(sc.kind) << "), " << tr.size() << " samples -> "
              << dir.string() << '\n';
    std::cout << std::setprecision(10);
    if (rep.consensus) {
        std::cout << "consensus: true, settle time " << rep.consensus->settle_time << ", x* = ("
                  << rep.consensus->x_star.transpose() << ")\n";
    } else {
        std::cout << "consensus: false, final disagreement " << rep.final_disagreement << '\n';
    }
    if (rep.q1_star) std::cout << "q1* = " << *rep.q1_star << ", q2* = " << *rep.q2_star << '\n';
    for (const auto& c : rep.checks)
        std::cout << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << c.detail << '\n';

    if (rep.diverged) {
        std::cerr << "divergence: state magnitude exceeded " << hiord::tol::kDivergenceGuard << " at "
                  << (tr.discrete ? "step " : "t = ") << *rep.diverged_at << "; last recorded sample at "
                  << (tr.size() ? tr.times.back() : 0.0) << ", reduced disagreement " << rep.final_reduced_disagreement
                  << '\n';
        return kExitDiverged;
    }
    return rep.all_passed() ? 0 : kExitChecksFailed;
}

int cmd_check(const std::string& which, std::uint64_t seed) {
    bool found = false, ok = true;
    for (const auto& suite : hiord::check_suites()) {
        if (which != "all" && which != suite.name) continue;
        found = true;
        for (const auto& c : suite.run(seed)) {
            ok = ok && c.passed;
            std::cout << (c.passed ? "ok   " : "FAIL ") << suite.name << "/" << c.name << ": " << c.detail << '\n';
        }
    }
    if (!found) {
        std::cerr << "unknown suite '" << which << "'; available:";
        for (const auto& s : hiord::check_suites()) std::cerr << ' ' << s.name;
        std::cerr << " all\n";
        return kExitConfig;
    }
    return ok ? 0 : kExitChecksFailed;
}

std::string join(const std::vector<int>& xs) {
    std::string s;
    for (std::size_t k = 0; k < xs.size(); ++k) s += (k ? "," : "") + std::to_string(xs[k] + 1);
    return s.empty() ? "-" : s;
}

int cmd_verify(const Source& src, std::optional<double> window, bool failures_only) {
    const hiord::Scenario sc = load_scenario(src);
    if (!window) window = sc.ujqsc_window;
    if (!window) throw hiord::Error("verify-topology: no --window given and the scenario sets no ujqsc_window");
    bool verdict = true;
    std::cout << std::left << std::setw(14) << "start" << std::setw(14) << "end" << std::setw(12) << "graphs"
              << std::setw(10) << "qsc" << "centers\n";
    auto row = [&](double a, double b, const std::vector<int>& active, bool connected, const std::vector<int>& centers) {
        verdict = verdict && connected;
        if (failures_only && connected) return;
        std::cout << std::setw(14) << a << std::setw(14) << b << std::setw(12) << join(active) << std::setw(10)
                  << (connected ? "yes" : "no") << join(centers) << '\n';
    };
    if (sc.is_discrete()) {
        const auto M = static_cast<long long>(*window);
        const auto& sig = *sc.dsignal;
        if (M + 1 > sc.steps) verdict = false;
        for (long long k = 0; k + M < sc.steps; ++k) {
            std::vector<hiord::DirectedGraph> gs;
            std::vector<int> active;
            for (long long j = k; j <= k + M; ++j) {
                gs.push_back(sig.graph_at(j));
                const int idx = sig.index_at(j);
                if (std::find(active.begin(), active.end(), idx) == active.end()) active.push_back(idx);
            }
            std::sort(active.begin(), active.end());
            const auto qs = hiord::quasi_strong_connectivity(hiord::graph_union(gs));
            row(static_cast<double>(k), static_cast<double>(k + M), active, qs.connected, qs.centers);
        }
        std::cout << "window " << M << " steps, horizon " << sc.steps << " steps\n";
    } else {
        const auto rep = hiord::ujqsc_report(*sc.signal, *window);
        for (const auto& w : rep.windows) row(w.start, w.end, w.active, w.connected, w.centers);
        verdict = rep.verdict;
        std::cout << "window " << *window << " s, " << rep.windows.size() << " windows checked up to t = " << rep.horizon
                  << (rep.horizon_limited ? " (explicit schedule: verdict limited to the horizon)" : "") << '\n';
    }
    std::cout << "UJQSC: " << (verdict ? "true" : "false") << '\n';
    return verdict ? 0 : kExitChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consensus of high-order integrator networks under switching directed topologies"};
    app.require_subcommand(1);

    Source src;
    std::optional<double> dt, duration, tol, window;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool no_plots = false, failures_only = false;
    std::string suite = "all";

    auto* run = app.add_subcommand("run", "simulate a built-in scenario or config file");
    run->add_option("scenario", src.arg, "built-in name (example1, example2, example3) or config path")->required();
    run->add_option("--dt", dt, "integration step [s]");
    run->add_option("--duration", duration, "simulated time [s]");
    run->add_option("--seed", seed, "seed for random initial states");
    run->add_option("--tol", tol, "consensus tolerance");
    run->add_option("--override", src.overrides, "key=value, e.g. a=-1,3,3 (repeatable)");
    run->add_option("--out", out_dir, "output root (default $HIORD_OUT, then ./runs)");
    run->add_flag("--no-plots", no_plots, "skip plot data files");

    auto* check = app.add_subcommand("check", "run invariant suites");
    check->add_option("suite", suite, "suite name or 'all'");
    check->add_option("--seed", seed, "seed for randomized suites");

    auto* verify = app.add_subcommand("verify-topology", "per-window joint-connectivity table and UJQSC verdict");
    verify->add_option("scenario", src.arg, "built-in name or config path")->required();
    verify->add_option("--window", window, "window length T [s] (steps for discrete signals)");
    verify->add_option("--override", src.overrides, "key=value (repeatable)");
    verify->add_flag("--failures-only", failures_only, "print only windows whose union is not quasi-strongly connected");

    app.add_subcommand("list", "list built-in scenarios and suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        src.seed = seed;
        if (run->parsed()) return cmd_run(src, dt, duration, tol, out_dir, !no_plots);
        if (check->parsed()) return cmd_check(suite, seed.value_or(1));
        if (verify->parsed()) return cmd_verify(src, window, failures_only);
        std::cout << "scenarios:";
        for (const auto& n : hiord::builtin_scenario_names()) std::cout << ' ' << n;
        std::cout << "\nsuites:";
        for (const auto& s : hiord::check_suites()) std::cout << ' ' << s.name;
        std::cout << " all\n";
        return 0;
    } catch (const hiord::config::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const hiord::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

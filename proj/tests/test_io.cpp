#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "hiord/io.hpp"
#include "hiord/scenarios.hpp"
#include "hiord/summary.hpp"
#include "support.hpp"

using namespace hiord;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hiord_test_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Trajectory random_trajectory(std::mt19937_64& rng, int agents, int order, bool observers, std::size_t rows) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    Trajectory tr;
    tr.agents = agents;
    tr.order = order;
    for (std::size_t k = 0; k < rows; ++k) {
        tr.times.push_back(0.1 * static_cast<double>(k));
        tr.graph_index.push_back(static_cast<int>(k % 3));
        Vector X(agents * order), S(agents * order);
        for (Eigen::Index j = 0; j < X.size(); ++j) {
            X(j) = std::ldexp(U(rng), expo(rng));
            S(j) = U(rng);
        }
        tr.states.push_back(X);
        if (observers) tr.observers.push_back(S);
    }
    return tr;
}

}  // namespace

TEST_CASE("17 significant digits round trip exactly") {
    std::mt19937_64 rng(41);
    int mismatches = 0;
    for (int rep = 0; rep < 100000; ++rep) {
        double x;
        const std::uint64_t bits = rng();
        std::memcpy(&x, &bits, sizeof x);
        if (!std::isfinite(x)) continue;
        if (parse_double(format_double(x)) != x) ++mismatches;
    }
    CHECK(mismatches == 0);
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(-3.0) == "-3");
    CHECK(parse_double(format_double(std::numeric_limits<double>::denorm_min())) ==
          std::numeric_limits<double>::denorm_min());
    CHECK_THROWS_AS(parse_double("1.5x"), Error);
    CHECK_THROWS_AS(parse_double(""), Error);
}

TEST_CASE("CSV header layout") {
    Trajectory tr;
    tr.agents = 2;
    tr.order = 3;
    const auto h = csv_header(tr);
    REQUIRE(h.size() == 8);
    CHECK(h[0] == "time");
    CHECK(h[1] == "graph");
    CHECK(h[2] == "x_1_1");
    CHECK(h[4] == "x_1_3");
    CHECK(h[5] == "x_2_1");
    tr.observers.push_back(Vector::Zero(6));
    tr.states.push_back(Vector::Zero(6));
    tr.times.push_back(0.0);
    tr.graph_index.push_back(0);
    const auto ho = csv_header(tr);
    CHECK(ho.size() == 14);
    CHECK(ho[8] == "s_1_1");
}

TEST_CASE("CSV round trip is bit exact") {
    std::mt19937_64 rng(42);
    for (bool obs : {false, true}) {
        const auto tr = random_trajectory(rng, 3, 4, obs, 50);
        std::stringstream ss;
        write_csv(ss, tr);
        const auto back = read_csv(ss);
        CHECK(back.agents == 3);
        CHECK(back.order == 4);
        REQUIRE(back.size() == tr.size());
        CHECK(back.times == tr.times);
        CHECK(back.graph_index == tr.graph_index);
        bool same = true;
        for (std::size_t k = 0; k < tr.size(); ++k) {
            same = same && back.states[k] == tr.states[k];
            if (obs) same = same && back.observers[k] == tr.observers[k];
        }
        CHECK(same);
        CHECK(back.has_observers() == obs);
    }
}

TEST_CASE("CSV graph column is one-based") {
    std::mt19937_64 rng(43);
    const auto tr = random_trajectory(rng, 1, 2, false, 2);
    std::stringstream ss;
    write_csv(ss, tr);
    std::string header, row;
    std::getline(ss, header);
    std::getline(ss, row);
    CHECK(header == "time,graph,x_1_1,x_1_2");
    CHECK(row.rfind("0,1,", 0) == 0);
}

TEST_CASE("malformed CSV input is rejected") {
    std::stringstream empty;
    CHECK_THROWS_AS(read_csv(empty), Error);
    std::stringstream bad_header("t,g,x\n");
    CHECK_THROWS_AS(read_csv(bad_header), Error);
    std::stringstream short_row("time,graph,x_1_1,x_1_2\n0,1,2\n");
    CHECK_THROWS_AS(read_csv(short_row), Error);
}

TEST_CASE("CSV files on disk") {
    const auto dir = scratch("csv");
    std::mt19937_64 rng(44);
    const auto tr = random_trajectory(rng, 2, 2, true, 10);
    write_csv(dir / "t.csv", tr);
    const auto back = read_csv(dir / "t.csv");
    CHECK(back.states.back() == tr.states.back());
    CHECK_THROWS_AS(read_csv(dir / "missing.csv"), Error);
    fs::remove_all(dir);
}

TEST_CASE("plot data and script from a short robot run") {
    Scenario sc = example1_scenario();
    sc.set_duration(0.5);
    sc.decimate = 50;
    const auto tr = simulate(sc);
    const auto dir = scratch("plots");
    const auto series = write_plot_data(dir, tr);
    // 5 agents x 4 components + 5 agents x (q1, q2)
    CHECK(series.size() == 30);
    for (const auto& s : series) CHECK(fs::exists(dir / s.file));

    std::ifstream f(dir / "x_3_2.dat");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(f, line)) {
        std::istringstream ls(line);
        double t, v;
        ls >> t >> v;
        REQUIRE(rows < tr.size());
        CHECK(t == tr.times[rows]);
        CHECK(v == tr.states[rows](2 * 4 + 1));
        ++rows;
    }
    CHECK(rows == tr.size());

    std::ifstream q(dir / "q1_5.dat");
    double t0, q0;
    q >> t0 >> q0;
    CHECK(q0 == -3.14);

    const auto script = gnuplot_script(series, false);
    CHECK(script.find("set output 'x1.png'") != std::string::npos);
    CHECK(script.find("set output 'q2.png'") != std::string::npos);
    CHECK(script.find("'x_5_4.dat' using 1:2 with lines title 'agent 5'") != std::string::npos);
    CHECK(gnuplot_script(series, true).find("with steps") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("summary JSON schema") {
    Scenario sc = example3_scenario();
    sc.steps = 200;
    const auto tr = simulate(sc);
    const auto rep = analyze_run(sc, tr);
    const auto j = summary_json(sc, tr, rep);

    CHECK(j["schema"] == "hiord-summary/1");
    CHECK(j["scenario"] == "example3");
    CHECK(j["kind"] == "discrete");
    CHECK(j["agents"] == 4);
    CHECK(j["steps"] == 200);
    CHECK_FALSE(j.contains("dt"));
    CHECK(j["samples"] == tr.size());
    CHECK(j["diverged"] == false);
    CHECK(j["diverged_at"].is_null());
    CHECK(j["consensus"] == true);
    CHECK(j["x_star"].size() == 4);
    CHECK(j["settle_time"].is_number());
    CHECK(j["ujqsc"]["verdict"] == true);
    CHECK(j["checks"].is_array());
    CHECK(j["all_checks_passed"] == rep.all_passed());
    CHECK_FALSE(j.contains("q_star"));

    // key order is stable
    auto it = j.begin();
    CHECK(it.key() == "schema");
    CHECK((++it).key() == "scenario");

    const auto dir = scratch("summary");
    write_summary(dir / "summary.json", j);
    std::ifstream in(dir / "summary.json");
    const auto parsed = nlohmann::ordered_json::parse(in);
    CHECK(parsed == j);
    fs::remove_all(dir);
}

TEST_CASE("summary of a diverging run") {
    const auto sig = SwitchingSignal::constant(DirectedGraph::empty(1), 50.0);
    Scenario sc = testing_support::chain_scenario(sig, {-1.0}, (Vector(2) << 1, 1).finished(), 50.0, 1e-2);
    const auto tr = simulate(sc);
    REQUIRE(tr.diverged());
    const auto j = summary_json(sc, tr, analyze_run(sc, tr));
    CHECK(j["diverged"] == true);
    CHECK(j["diverged_at"].is_number());
    CHECK(j["all_checks_passed"] == false);
}

#pragma once

// Built-in scenarios: five flexible-joint robots under state feedback, four
// aircraft under observer-based general-LTI feedback, and four discrete
// fourth-order integrators under the discrete observer protocol.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "engine.hpp"
#include "error.hpp"
#include "gains.hpp"
#include "graph.hpp"
#include "plants.hpp"
#include "switching.hpp"

namespace hiord {

/// The three topologies cycled in the robot example (zero-based nodes).
inline std::vector<DirectedGraph> example1_graphs() {
    return {
        DirectedGraph(5, {{1, 0, 1.0}, {3, 0, 1.0}, {4, 2, 1.0}}),
        DirectedGraph(5, {{0, 4, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}}),
        DirectedGraph(5, {{2, 1, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}}),
    };
}

/// Stand-in for the four-graph family of the aircraft and discrete examples:
/// a directed ring 1 -> 2 -> 3 -> 4 -> 1 split into one edge per graph. The
/// union is strongly connected; no single graph is.
inline std::vector<DirectedGraph> ring_split_graphs(int n) {
    require(n >= 2, "ring_split_graphs: need at least two nodes");
    std::vector<DirectedGraph> gs;
    for (int k = 0; k < n; ++k) gs.push_back(DirectedGraph(n, {{(k + 1) % n, k, 1.0}}));
    return gs;
}

/// Robot example: 5 agents, K1 = (0,-1,-3,-3), K2 = (1,3,3,1), 0.1 s slots
/// cycling G1, G2, G3, 60 s at dt = 1e-3.
inline Scenario example1_scenario() {
    Scenario sc;
    sc.name = "example1";
    sc.kind = ScenarioKind::StateFeedback;
    sc.agents = 5;
    sc.order = 4;
    const std::vector<double> a{1.0, 3.0, 3.0};
    sc.gains = make_continuous_gains(a);
    sc.plant = integrator_chain(4);
    sc.robot = FlexibleJointParams{};
    sc.duration = 60.0;
    sc.dt = 1e-3;
    sc.signal.emplace(example1_graphs(), PeriodicSchedule{0.1, {0, 1, 2}}, sc.duration);
    sc.ujqsc_window = 0.3;

    const double q[5][2] = {{2.5, 1.5}, {1.9, 3.14}, {-2.4, -2.6}, {1.57, -1.5}, {-3.14, 0.0}};
    sc.x0 = Vector::Zero(20);
    for (int i = 0; i < 5; ++i) {
        sc.x0(4 * i + 0) = q[i][0];
        sc.x0(4 * i + 2) = q[i][1];
    }
    return sc;
}

/// Literal observer gain of the aircraft example.
inline Vector example2_observer_gain() {
    Vector K3(4);
    K3 << 1.0 / 3.0, -2.0 / 3.0, -6.0, -7.0;
    return K3;
}

/// Aircraft example: general-LTI protocol with altitude output only.
inline Scenario example2_scenario() {
    Scenario sc;
    sc.name = "example2";
    sc.kind = ScenarioKind::GeneralLti;
    sc.agents = 4;
    sc.order = 4;
    const std::vector<double> a{1.0, 3.0, 3.0};
    sc.gains = make_continuous_gains(a, example2_observer_gain());
    sc.plant = AircraftParams{}.system();
    sc.canon = to_controllable_canonical(sc.plant);
    sc.duration = 100.0;
    sc.dt = 1e-3;
    sc.decimate = 10;
    sc.signal.emplace(ring_split_graphs(4), PeriodicSchedule{0.1, {0, 1, 2, 3}}, sc.duration);
    sc.ujqsc_window = 0.4;

    const double h0[4] = {8000.0, 6500.0, 7000.0, 5000.0};
    const double s0[4] = {10000.0, 7000.0, 6000.0, 4000.0};
    sc.x0 = Vector::Zero(16);
    sc.s0 = Vector::Zero(16);
    for (int i = 0; i < 4; ++i) {
        sc.x0(4 * i + 2) = h0[i];
        sc.s0(4 * i + 2) = s0[i];
    }
    return sc;
}

inline Vector example3_observer_gain() {
    Vector K6(4);
    K6 << -2.0, -1.5, -0.5, -1.0 / 16.0;
    return K6;
}

/// Discrete example: b = (1/8, 3/4, 3/2), literal K6, initial states uniform on
/// [-5, 5]^4 from a seeded mt19937_64, observers at zero, 400 steps.
inline Scenario example3_scenario(std::uint64_t seed = 1) {
    Scenario sc;
    sc.name = "example3";
    sc.kind = ScenarioKind::Discrete;
    sc.agents = 4;
    sc.order = 4;
    const std::vector<double> b{1.0 / 8.0, 3.0 / 4.0, 3.0 / 2.0};
    sc.discrete_gains = make_discrete_gains(b, example3_observer_gain());
    sc.plant = integrator_chain(4);
    sc.dsignal.emplace(ring_split_graphs(4), std::vector<int>{0, 1, 2, 3});
    sc.steps = 400;
    sc.ujqsc_window = 3;

    // top 53 bits of each draw; std::uniform_real_distribution differs between libraries
    std::mt19937_64 rng(seed);
    sc.x0 = Vector(16);
    for (Eigen::Index k = 0; k < sc.x0.size(); ++k) sc.x0(k) = -5.0 + 10.0 * std::ldexp(static_cast<double>(rng() >> 11), -53);
    sc.s0 = Vector::Zero(16);
    sc.consensus_tol = 1e-6;
    return sc;
}

/// Example 1 topology with linear agents started at the robots' linearized
/// states and a = (-1, 3, 3), whose characteristic polynomial (s+1)^3 - 2 has
/// the root 2^(1/3) - 1 > 0. The reduced states still agree; the full states
/// reach the divergence guard after roughly 95 s.
inline Scenario necessity_scenario() {
    Scenario sc = example1_scenario();
    sc.name = "necessity";
    const FlexibleJointParams p = *sc.robot;
    sc.robot.reset();
    const Vector q = sc.x0;
    for (int i = 0; i < sc.agents; ++i) sc.x0.segment(4 * i, 4) = fl_state(q(4 * i), q(4 * i + 1), q(4 * i + 2), q(4 * i + 3), p);
    const std::vector<double> a{-1.0, 3.0, 3.0};
    sc.gains = make_continuous_gains(a);
    sc.set_duration(200.0);
    sc.decimate = 100;
    return sc;
}

inline const std::vector<std::string>& builtin_scenario_names() {
    static const std::vector<std::string> names{"example1", "example2", "example3", "necessity"};
    return names;
}

inline bool is_builtin_scenario(std::string_view name) {
    for (const auto& n : builtin_scenario_names())
        if (n == name) return true;
    return false;
}

inline Scenario builtin_scenario(std::string_view name, std::uint64_t seed = 1) {
    if (name == "example1") return example1_scenario();
    if (name == "example2") return example2_scenario();
    if (name == "example3") return example3_scenario(seed);
    if (name == "necessity") return necessity_scenario();
    throw Error("unknown built-in scenario '" + std::string(name) + "'");
}

}  // namespace hiord

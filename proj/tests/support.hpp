#pragma once

// Small scenario builders shared by the unit tests.

#include <optional>
#include <vector>

#include "hiord/engine.hpp"
#include "hiord/gains.hpp"
#include "hiord/switching.hpp"

namespace testing_support {

using namespace hiord;

inline Scenario chain_scenario(SwitchingSignal sig, const std::vector<double>& a, Vector x0, double duration,
                               double dt = 1e-3, std::optional<Vector> K3 = std::nullopt, Vector s0 = Vector()) {
    Scenario sc;
    sc.name = "test";
    sc.kind = K3 ? ScenarioKind::OutputFeedback : ScenarioKind::StateFeedback;
    sc.agents = sig.node_count();
    sc.order = static_cast<int>(a.size()) + 1;
    sc.gains = make_continuous_gains(a, K3);
    sc.plant = integrator_chain(sc.order);
    sc.signal.emplace(std::move(sig));
    sc.x0 = std::move(x0);
    sc.s0 = K3 ? std::move(s0) : Vector();
    sc.dt = dt;
    sc.duration = duration;
    return sc;
}

inline Scenario discrete_scenario(DiscreteSwitchingSignal sig, const std::vector<double>& b, const Vector& K6, Vector x0,
                                  Vector s0, long long steps) {
    Scenario sc;
    sc.name = "test";
    sc.kind = ScenarioKind::Discrete;
    sc.agents = sig.node_count();
    sc.order = static_cast<int>(b.size()) + 1;
    sc.discrete_gains = make_discrete_gains(b, K6);
    sc.plant = integrator_chain(sc.order);
    sc.dsignal.emplace(std::move(sig));
    sc.x0 = std::move(x0);
    sc.s0 = std::move(s0);
    sc.steps = steps;
    return sc;
}

}  // namespace testing_support

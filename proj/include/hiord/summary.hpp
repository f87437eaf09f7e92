#pragma once

// summary.json for a run. Needs nlohmann/json on the include path.
//
// Schema "hiord-summary/1":
//   schema, scenario, kind, agents, order, dt, duration | steps, samples
//   diverged (bool), diverged_at (number | null)
//   consensus (bool), x_star (array | null), settle_time (number | null)
//   final_disagreement, final_reduced_disagreement
//   q_star { q1, q2 } (robot runs only)
//   ujqsc { window, verdict } (when a window is configured)
//   checks [ { name, passed, detail } ], all_checks_passed

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <vector>

#include "checks.hpp"
#include "engine.hpp"

namespace hiord {

inline nlohmann::ordered_json summary_json(const Scenario& sc, const Trajectory& tr, const RunReport& rep) {
    using json = nlohmann::ordered_json;
    json j;
    j["schema"] = "hiord-summary/1";
    j["scenario"] = sc.name;
    j["kind"] = to_string(sc.kind);
    j["agents"] = sc.agents;
    j["order"] = sc.order;
    if (sc.is_discrete()) {
        j["steps"] = sc.steps;
    } else {
        j["dt"] = sc.dt;
        j["duration"] = sc.duration;
    }
    j["samples"] = tr.size();
    j["diverged"] = rep.diverged;
    j["diverged_at"] = rep.diverged_at ? json(*rep.diverged_at) : json(nullptr);
    j["consensus"] = rep.consensus.has_value();
    if (rep.consensus) {
        j["x_star"] = std::vector<double>(rep.consensus->x_star.data(), rep.consensus->x_star.data() + rep.consensus->x_star.size());
        j["settle_time"] = rep.consensus->settle_time;
    } else {
        j["x_star"] = nullptr;
        j["settle_time"] = nullptr;
    }
    j["final_disagreement"] = rep.final_disagreement;
    j["final_reduced_disagreement"] = rep.final_reduced_disagreement;
    if (rep.q1_star) j["q_star"] = {{"q1", *rep.q1_star}, {"q2", *rep.q2_star}};
    if (rep.ujqsc_window) j["ujqsc"] = {{"window", *rep.ujqsc_window}, {"verdict", *rep.ujqsc_verdict}};
    json checks = json::array();
    for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = std::move(checks);
    j["all_checks_passed"] = rep.all_passed();
    return j;
}

inline void write_summary(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path);
    require(static_cast<bool>(out), "cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace hiord

#pragma once

// Builds scenarios from parsed configuration tables and applies command-line
// overrides. Node and graph indices in config files are one-based.
//
// Schema (top level):
//   name        string
//   kind        state-feedback | output-feedback | general-lti | discrete
//   agents      integer N
//   order       integer m (defaults to len(a) + 1, len(b) + 1 or the plant order)
//   a, b        coefficient vectors of length m - 1 (defaults: (s+1)^(m-1), (s+0.5)^(m-1))
//   k3, k6      observer gains; placed at -2 (continuous) or 0.25 (discrete) when absent
//   plant       integrator | aircraft | robot, optionally with a parameter table,
//               or linear { A = [[..]], B = [..], C = [..] }
//   graphs      [[2 <- 1 : 1.0, ...], ...]
//   switching   periodic { slot, cycle } | explicit { times, indices } | constant { graph }
//               discrete: periodic { cycle } | explicit { sequence }
//   x0, s0      [[agent 1 state], ...] or uniform { low, high } (seeded)
//   dt, duration, steps, decimate, tol, window, seed, ujqsc_window

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "engine.hpp"
#include "gains.hpp"
#include "graph.hpp"
#include "lti_tools.hpp"
#include "plants.hpp"
#include "switching.hpp"

namespace hiord {

namespace cfg_detail {

using config::Array;
using config::ParseError;
using config::Table;
using config::Value;

[[noreturn]] inline void fail(const Value& v, const std::string& msg) { throw ParseError(v.pos, msg); }

inline const Value& need(const Table& t, std::string_view key, const Value& owner) {
    const Value* v = t.find(key);
    if (!v) fail(owner, "missing required key '" + std::string(key) + "'");
    return *v;
}

inline double number(const Value& v, std::string_view what) {
    const auto* n = v.as<config::Number>();
    if (!n) fail(v, std::string(what) + ": expected a number, found " + v.kind_name());
    return n->value;
}

inline long long integer(const Value& v, std::string_view what) {
    const auto* n = v.as<config::Number>();
    if (!n || !n->integral) fail(v, std::string(what) + ": expected an integer");
    return static_cast<long long>(n->value);
}

inline std::string word(const Value& v, std::string_view what) {
    if (const auto* s = v.as<std::string>()) return *s;
    if (const auto* id = v.as<config::Identifier>()) return id->name;
    fail(v, std::string(what) + ": expected a name, found " + v.kind_name());
}

inline const Array& array(const Value& v, std::string_view what) {
    const auto* a = v.as<Array>();
    if (!a) fail(v, std::string(what) + ": expected an array, found " + v.kind_name());
    return *a;
}

inline std::vector<double> numbers(const Value& v, std::string_view what) {
    std::vector<double> out;
    for (const auto& x : array(v, what)) out.push_back(number(x, what));
    return out;
}

inline Vector vector_of(const Value& v, std::string_view what) {
    const auto xs = numbers(v, what);
    return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

inline Matrix matrix_of(const Value& v, std::string_view what) {
    const auto& rows = array(v, what);
    if (rows.empty()) fail(v, std::string(what) + ": empty matrix");
    const auto cols = numbers(rows.front(), what).size();
    Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto row = numbers(rows[r], what);
        if (row.size() != cols) fail(rows[r], std::string(what) + ": ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
    return M;
}

inline std::optional<double> opt_number(const Table& t, std::string_view key) {
    const Value* v = t.find(key);
    if (!v) return std::nullopt;
    return number(*v, key);
}

inline ScenarioKind parse_kind(const Value& v) {
    const auto k = word(v, "kind");
    if (k == "state-feedback") return ScenarioKind::StateFeedback;
    if (k == "output-feedback") return ScenarioKind::OutputFeedback;
    if (k == "general-lti") return ScenarioKind::GeneralLti;
    if (k == "discrete") return ScenarioKind::Discrete;
    fail(v, "kind: unknown scenario kind '" + k + "'");
}

/// Reads overrides of struct fields from an optional parameter table.
template <class Params>
void read_params(const Value& v, Params& p, std::initializer_list<std::pair<const char*, double Params::*>> fields) {
    const auto* t = v.as<Table>();
    if (!t) return;
    for (const auto& e : t->entries) {
        bool known = false;
        for (const auto& [name, member] : fields)
            if (e.key == name) {
                p.*member = number(*e.value, e.key);
                known = true;
            }
        if (!known) fail(*e.value, "plant: unknown parameter '" + e.key + "'");
    }
}

struct PlantChoice {
    LTISystem system;
    std::optional<FlexibleJointParams> robot;
};

inline PlantChoice parse_plant(const Value* v, int order_hint) {
    PlantChoice out;
    if (!v) {
        if (order_hint < 2) throw ParseError(config::Position{}, "cannot infer the agent order; set 'order' or 'a'/'b'");
        out.system = integrator_chain(order_hint);
        return out;
    }
    std::string name;
    if (const auto* t = v->as<Table>()) {
        if (t->tag.empty()) fail(*v, "plant: expected integrator, aircraft, robot or linear { ... }");
        name = t->tag;
    } else {
        name = word(*v, "plant");
    }
    if (name == "integrator") {
        int m = order_hint;
        if (const auto* t = v->as<Table>()) {
            if (const Value* o = t->find("order")) m = static_cast<int>(integer(*o, "order"));
        }
        if (m < 2) fail(*v, "plant: integrator order must be at least 2");
        out.system = integrator_chain(m);
    } else if (name == "aircraft") {
        AircraftParams p;
        read_params(*v, p,
                    {{"J", &AircraftParams::J}, {"m", &AircraftParams::m}, {"b", &AircraftParams::b},
                     {"C_ZE", &AircraftParams::C_ZE}, {"C_ZW", &AircraftParams::C_ZW}, {"l", &AircraftParams::l},
                     {"d", &AircraftParams::d}});
        out.system = p.system();
    } else if (name == "robot") {
        FlexibleJointParams p;
        read_params(*v, p,
                    {{"I", &FlexibleJointParams::I}, {"J", &FlexibleJointParams::J}, {"M", &FlexibleJointParams::M},
                     {"g", &FlexibleJointParams::g}, {"L", &FlexibleJointParams::L}, {"k", &FlexibleJointParams::k}});
        p.validate();
        out.robot = p;
        out.system = integrator_chain(4);
    } else if (name == "linear") {
        const auto* t = v->as<Table>();
        if (!t) fail(*v, "plant: linear needs a table with A, B and C");
        out.system.A = matrix_of(need(*t, "A", *v), "A");
        out.system.B = vector_of(need(*t, "B", *v), "B");
        out.system.C = vector_of(need(*t, "C", *v), "C").transpose();
        try {
            out.system.validate();
        } catch (const Error& e) {
            fail(*v, e.what());
        }
    } else {
        fail(*v, "plant: unknown plant '" + name + "'");
    }
    return out;
}

inline std::vector<DirectedGraph> parse_graphs(const Value& v, int n) {
    std::vector<DirectedGraph> out;
    for (const auto& gv : array(v, "graphs")) {
        std::vector<Edge> edges;
        for (const auto& ev : array(gv, "graph")) {
            const auto* e = ev.as<config::EdgeLiteral>();
            if (!e) fail(ev, "graph: expected an edge 'receiver <- sender : weight'");
            if (e->receiver < 1 || e->receiver > n || e->sender < 1 || e->sender > n)
                fail(ev, "graph: node index outside 1.." + std::to_string(n));
            edges.push_back({static_cast<int>(e->receiver - 1), static_cast<int>(e->sender - 1), e->weight});
        }
        try {
            out.emplace_back(n, edges);
        } catch (const Error& err) {
            fail(gv, err.what());
        }
    }
    if (out.empty()) fail(v, "graphs: at least one graph is required");
    return out;
}

/// One-based graph indices; a bare number is a one-element list.
inline std::vector<int> graph_indices(const Value& v, std::string_view what, std::size_t graph_count) {
    std::vector<int> out;
    const Array single{v};
    for (const auto& x : v.is<config::Number>() ? single : array(v, what)) {
        const auto k = integer(x, what);
        if (k < 1 || k > static_cast<long long>(graph_count))
            fail(x, std::string(what) + ": graph index outside 1.." + std::to_string(graph_count));
        out.push_back(static_cast<int>(k - 1));
    }
    if (out.empty()) fail(v, std::string(what) + ": empty index list");
    return out;
}

inline Vector initial_states(const Value& v, std::string_view what, int agents, int dim, std::mt19937_64& rng) {
    Vector out(static_cast<Eigen::Index>(agents) * dim);
    if (const auto* t = v.as<Table>()) {
        if (t->tag != "uniform") fail(v, std::string(what) + ": expected an array of agent states or uniform { low, high }");
        const double lo = number(need(*t, "low", v), "low");
        const double hi = number(need(*t, "high", v), "high");
        if (!(lo <= hi)) fail(v, std::string(what) + ": low must not exceed high");
        for (Eigen::Index k = 0; k < out.size(); ++k)
            out(k) = lo + (hi - lo) * std::ldexp(static_cast<double>(rng() >> 11), -53);
        return out;
    }
    const auto& rows = array(v, what);
    if (static_cast<int>(rows.size()) != agents)
        fail(v, std::string(what) + ": expected " + std::to_string(agents) + " agent states");
    for (int i = 0; i < agents; ++i) {
        const auto xs = numbers(rows[static_cast<std::size_t>(i)], what);
        if (static_cast<int>(xs.size()) != dim)
            fail(rows[static_cast<std::size_t>(i)], std::string(what) + ": expected " + std::to_string(dim) + " entries");
        for (int k = 0; k < dim; ++k) out(i * dim + k) = xs[static_cast<std::size_t>(k)];
    }
    return out;
}

inline Vector observer_gain(const Table& root, std::string_view key, const LTISystem& plant, bool discrete,
                            const Value& owner) {
    if (const Value* v = root.find(key)) {
        Vector K = vector_of(*v, key);
        if (K.size() != plant.order()) fail(*v, std::string(key) + ": expected " + std::to_string(plant.order()) + " entries");
        return K;
    }
    Polynomial desired = default_observer_polynomial(static_cast<int>(plant.order()), discrete);
    if (const Value* p = root.find("observer_poles")) {
        const auto poles = numbers(*p, "observer_poles");
        if (static_cast<Eigen::Index>(poles.size()) != plant.order()) fail(*p, "observer_poles: wrong count");
        desired = Polynomial::from_real_roots(poles);
    }
    try {
        return place_observer_gain(plant.A, plant.C, desired).K;
    } catch (const Error& e) {
        fail(owner, e.what());
    }
}

}  // namespace cfg_detail

/**
 * Builds a scenario from a parsed config. `seed` drives uniform initial states
 * and overrides a `seed` entry in the file when given.
 */
inline Scenario scenario_from_config(const config::Table& root, std::optional<std::uint64_t> seed = std::nullopt) {
    using namespace cfg_detail;
    config::Value owner;  // position 1:1 for document-level errors
    owner.data = root;

    static const char* known[] = {"name", "kind",  "agents",   "order", "a",    "b",      "k3",           "k6",
                                  "observer_poles", "plant", "graphs", "switching", "x0", "s0", "dt", "duration",
                                  "steps", "decimate", "tol", "window", "seed", "ujqsc_window"};
    for (const auto& e : root.entries) {
        bool ok = false;
        for (const char* k : known) ok = ok || e.key == k;
        if (!ok) throw ParseError(e.pos, "unknown key '" + e.key + "'");
    }

    Scenario sc;
    if (const Value* v = root.find("name")) sc.name = word(*v, "name");
    sc.kind = parse_kind(need(root, "kind", owner));
    const Value& agents_v = need(root, "agents", owner);
    const auto agents = integer(agents_v, "agents");
    if (agents < 1 || agents > 10000) fail(agents_v, "agents: must be between 1 and 10000");
    sc.agents = static_cast<int>(agents);

    const bool discrete = sc.is_discrete();
    const char* coeff_key = discrete ? "b" : "a";
    std::optional<std::vector<double>> coeffs;
    if (const Value* v = root.find(coeff_key)) coeffs = numbers(*v, coeff_key);
    if (const Value* v = root.find(discrete ? "a" : "b"))
        fail(*v, std::string("'") + (discrete ? "a" : "b") + "' does not apply to " + to_string(sc.kind) + " scenarios");

    int order_hint = coeffs ? static_cast<int>(coeffs->size()) + 1 : 0;
    if (const Value* v = root.find("order")) {
        const auto m = integer(*v, "order");
        if (m < 2 || m > 64) fail(*v, "order: must be between 2 and 64");
        if (coeffs && m != order_hint) fail(*v, std::string("order: disagrees with the length of '") + coeff_key + "'");
        order_hint = static_cast<int>(m);
    }
    auto plant = parse_plant(root.find("plant"), order_hint);
    sc.plant = plant.system;
    sc.robot = plant.robot;
    sc.order = static_cast<int>(sc.plant.order());
    if (order_hint && order_hint != sc.order) fail(owner, "order: plant order and gain length disagree");
    if (sc.kind != ScenarioKind::GeneralLti && !plant.robot) {
        // every non-general kind runs on the integrator chain
        const auto chain = integrator_chain(sc.order);
        if (!sc.plant.A.isApprox(chain.A) || !sc.plant.B.isApprox(chain.B))
            fail(*root.find("plant"), "plant: only general-lti scenarios accept a non-integrator plant");
    }
    if (plant.robot && sc.kind != ScenarioKind::StateFeedback)
        fail(*root.find("plant"), "plant: robot agents require kind = state-feedback");

    const std::vector<double> c = coeffs ? *coeffs
                                         : (discrete ? default_discrete_coefficients(sc.order)
                                                     : default_continuous_coefficients(sc.order));
    if (discrete) {
        sc.discrete_gains = make_discrete_gains(c, observer_gain(root, "k6", sc.plant, true, owner));
    } else {
        std::optional<Vector> K3;
        if (sc.has_observer()) K3 = observer_gain(root, "k3", sc.plant, false, owner);
        sc.gains = make_continuous_gains(c, K3);
    }
    if (sc.kind == ScenarioKind::GeneralLti) {
        try {
            sc.canon = to_controllable_canonical(sc.plant);
        } catch (const Error& e) {
            fail(root.find("plant") ? *root.find("plant") : owner, e.what());
        }
    }

    if (const auto v = opt_number(root, "dt")) sc.dt = *v;
    if (const auto v = opt_number(root, "tol")) sc.consensus_tol = *v;
    if (const auto v = opt_number(root, "window")) sc.consensus_window_fraction = *v;
    if (const auto v = opt_number(root, "ujqsc_window")) sc.ujqsc_window = *v;
    if (const Value* v = root.find("decimate")) sc.decimate = static_cast<int>(integer(*v, "decimate"));
    if (discrete) {
        sc.steps = integer(need(root, "steps", owner), "steps");
        if (sc.steps < 1) fail(*root.find("steps"), "steps: must be positive");
    } else {
        sc.duration = number(need(root, "duration", owner), "duration");
        if (!(sc.duration > 0.0)) fail(*root.find("duration"), "duration: must be positive");
    }

    const Value& graphs_v = need(root, "graphs", owner);
    auto graphs = parse_graphs(graphs_v, sc.agents);
    const Value& sw = need(root, "switching", owner);
    const auto* swt = sw.as<config::Table>();
    if (!swt || swt->tag.empty()) fail(sw, "switching: expected periodic { ... }, explicit { ... } or constant { ... }");
    try {
        if (discrete) {
            if (swt->tag == "periodic") {
                sc.dsignal.emplace(graphs, graph_indices(need(*swt, "cycle", sw), "cycle", graphs.size()));
            } else if (swt->tag == "explicit") {
                sc.dsignal.emplace(graphs, graph_indices(need(*swt, "sequence", sw), "sequence", graphs.size()),
                                   DiscreteSwitchingSignal::Mode::Explicit);
            } else if (swt->tag == "constant") {
                const auto g = graph_indices(need(*swt, "graph", sw), "graph", graphs.size());
                sc.dsignal.emplace(graphs, g);
            } else {
                fail(sw, "switching: unknown schedule '" + swt->tag + "'");
            }
        } else {
            if (swt->tag == "periodic") {
                const double slot = number(need(*swt, "slot", sw), "slot");
                sc.signal.emplace(graphs, PeriodicSchedule{slot, graph_indices(need(*swt, "cycle", sw), "cycle", graphs.size())},
                                  sc.duration);
            } else if (swt->tag == "explicit") {
                ExplicitSchedule e;
                e.times = numbers(need(*swt, "times", sw), "times");
                e.indices = graph_indices(need(*swt, "indices", sw), "indices", graphs.size());
                sc.signal.emplace(graphs, e, sc.duration);
            } else if (swt->tag == "constant") {
                const auto g = graph_indices(need(*swt, "graph", sw), "graph", graphs.size());
                sc.signal.emplace(graphs, ExplicitSchedule{{0.0}, g}, sc.duration);
            } else {
                fail(sw, "switching: unknown schedule '" + swt->tag + "'");
            }
        }
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        fail(sw, e.what());
    }

    std::uint64_t s = 1;
    if (const Value* v = root.find("seed")) s = static_cast<std::uint64_t>(integer(*v, "seed"));
    if (seed) s = *seed;
    std::mt19937_64 rng(s);
    const int phys = plant.robot ? 4 : sc.order;
    sc.x0 = initial_states(need(root, "x0", owner), "x0", sc.agents, phys, rng);
    if (sc.has_observer()) {
        if (const Value* v = root.find("s0"))
            sc.s0 = initial_states(*v, "s0", sc.agents, sc.order, rng);
        else
            sc.s0 = Vector::Zero(static_cast<Eigen::Index>(sc.agents) * sc.order);
    } else if (const Value* v = root.find("s0")) {
        fail(*v, "s0: state-feedback scenarios have no observers");
    }

    try {
        sc.validate();
    } catch (const Error& e) {
        throw ParseError(config::Position{}, e.what());
    }
    return sc;
}

/// Parses `key=value`. A bare comma list such as `a=-1,3,3` is read as an array.
inline std::pair<std::string, config::Value> parse_override(std::string_view text) {
    const auto eq = text.find('=');
    require(eq != std::string_view::npos && eq > 0, "override '" + std::string(text) + "' is not of the form key=value");
    std::string key(text.substr(0, eq));
    std::string rhs(text.substr(eq + 1));
    while (!key.empty() && key.back() == ' ') key.pop_back();
    const auto first = rhs.find_first_not_of(' ');
    const bool bracketed = first != std::string::npos && (rhs[first] == '[' || rhs[first] == '{' || rhs[first] == '"');
    if (!bracketed && rhs.find(',') != std::string::npos) rhs = "[" + rhs + "]";
    try {
        return {key, config::parse_value(rhs)};
    } catch (const config::ParseError& e) {
        throw Error("override '" + std::string(text) + "': " + e.message());
    }
}

/**
 * Applies one override to an already-built scenario. Supported keys: a, b, k3,
 * k6, dt, duration, steps, tol, window, decimate, ujqsc_window.
 */
inline void apply_override(Scenario& sc, const std::string& key, const config::Value& v) {
    using namespace cfg_detail;
    if (key == "a") {
        require(!sc.is_discrete(), "override a: scenario is discrete");
        const auto c = numbers(v, key);
        require(static_cast<int>(c.size()) == sc.order - 1, "override a: expected " + std::to_string(sc.order - 1) + " entries");
        sc.gains = make_continuous_gains(c, sc.gains.K3);
    } else if (key == "b") {
        require(sc.is_discrete(), "override b: scenario is continuous");
        const auto c = numbers(v, key);
        require(static_cast<int>(c.size()) == sc.order - 1, "override b: expected " + std::to_string(sc.order - 1) + " entries");
        sc.discrete_gains = make_discrete_gains(c, sc.discrete_gains.K6);
    } else if (key == "k3") {
        require(!sc.is_discrete(), "override k3: scenario is discrete");
        const Vector K = vector_of(v, key);
        require(K.size() == sc.order, "override k3: wrong length");
        sc.gains.K3 = K;
    } else if (key == "k6") {
        require(sc.is_discrete(), "override k6: scenario is continuous");
        const Vector K = vector_of(v, key);
        require(K.size() == sc.order, "override k6: wrong length");
        sc.discrete_gains.K6 = K;
    } else if (key == "dt") {
        sc.dt = number(v, key);
    } else if (key == "duration") {
        require(!sc.is_discrete(), "override duration: discrete scenarios use steps");
        sc.set_duration(number(v, key));
    } else if (key == "steps") {
        require(sc.is_discrete(), "override steps: continuous scenarios use duration");
        sc.steps = integer(v, key);
    } else if (key == "tol") {
        sc.consensus_tol = number(v, key);
    } else if (key == "window") {
        sc.consensus_window_fraction = number(v, key);
    } else if (key == "decimate") {
        sc.decimate = static_cast<int>(integer(v, key));
    } else if (key == "ujqsc_window") {
        sc.ujqsc_window = number(v, key);
    } else {
        throw Error("override: unsupported key '" + key + "' for a built-in scenario");
    }
}

}  // namespace hiord

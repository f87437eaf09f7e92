#pragma once

// Post-run analysis of a trajectory and the named invariant suites behind
// `hiord check <suite|all>`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "engine.hpp"
#include "gains.hpp"
#include "graph.hpp"
#include "lti_tools.hpp"
#include "plants.hpp"
#include "protocols.hpp"
#include "scenarios.hpp"
#include "switching.hpp"
#include "tolerances.hpp"

namespace hiord {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

inline std::string fmt(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

/// Row vector mapping an agent state to its first-order reduced coordinate.
inline RowVector scenario_reducer(const Scenario& sc) {
    if (sc.is_discrete()) return sc.discrete_gains.K5;
    if (sc.kind == ScenarioKind::GeneralLti) return sc.gains.K2 * sc.canon->T;
    return sc.gains.K2;
}

struct RunReport {
    bool diverged = false;
    std::optional<double> diverged_at;
    std::optional<ConsensusResult> consensus;
    double final_disagreement = 0.0;          // max over components
    double final_reduced_disagreement = 0.0;  // reduced coordinate
    std::optional<double> q1_star, q2_star;   // robot runs
    std::optional<double> ujqsc_window;
    std::optional<bool> ujqsc_verdict;
    std::vector<CheckResult> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

/// max of the reduced states never increases and min never decreases (tolerance 1e-9).
inline CheckResult check_monotone_envelopes(const Trajectory& tr, const RowVector& reducer, double tolerance = 1e-9) {
    double worst = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        const Vector a = reduce(tr.states[k - 1], reducer);
        const Vector b = reduce(tr.states[k], reducer);
        worst = std::max({worst, b.maxCoeff() - a.maxCoeff(), a.minCoeff() - b.minCoeff()});
    }
    return {"monotone-envelope", worst <= tolerance, "worst violation " + fmt(worst)};
}

/**
 * Divergence demonstration: the full states hit the guard, no consensus is
 * detected, yet the reduced states agree. Near the guard K x loses about
 * eps * |x| to cancellation, so agreement is judged by the smallest reduced
 * disagreement reached and by the final value relative to the state scale.
 */
inline CheckResult check_necessity(const Trajectory& tr, const Scenario& sc) {
    const auto series = disagreement_series(tr, scenario_reducer(sc));
    const double smallest = series.empty() ? INFINITY : *std::min_element(series.begin(), series.end());
    const double relative = series.empty() ? INFINITY : series.back() / tr.states.back().cwiseAbs().maxCoeff();
    const bool empty = !detect_consensus(tr, sc.consensus_tol, sc.consensus_window_fraction * sc.duration).has_value();
    const bool ok = tr.diverged() && empty && smallest < 1e-6 && relative < 1e-12;
    return {"necessity", ok,
            std::string(tr.diverged() ? "guard hit at " + fmt(*tr.diverged_at) : "no divergence") +
                ", min reduced disagreement " + fmt(smallest) + ", final relative " + fmt(relative) +
                (empty ? ", no consensus" : ", consensus detected")};
}

inline RunReport analyze_run(const Scenario& sc, const Trajectory& tr) {
    RunReport rep;
    rep.diverged = tr.diverged();
    rep.diverged_at = tr.diverged_at;
    rep.checks.push_back({"no-divergence", !tr.diverged(),
                          tr.diverged() ? "state exceeded " + fmt(tol::kDivergenceGuard) + " at " + fmt(*tr.diverged_at)
                                        : "max |state| within guard"});
    const RowVector reducer = scenario_reducer(sc);
    if (tr.size() > 0) {
        const auto spreads = component_disagreement(tr);
        rep.final_disagreement = spreads.back().maxCoeff();
        rep.final_reduced_disagreement = disagreement(reduce(tr.states.back(), reducer));
    }

    const double span = tr.size() ? tr.times.back() - tr.times.front() : 0.0;
    rep.consensus = detect_consensus(tr, sc.consensus_tol, sc.consensus_window_fraction * span);
    rep.checks.push_back({"consensus", rep.consensus.has_value(),
                          rep.consensus ? "settled at " + fmt(rep.consensus->settle_time)
                                        : "final disagreement " + fmt(rep.final_disagreement)});

    if (sc.ujqsc_window) {
        rep.ujqsc_window = sc.ujqsc_window;
        if (sc.is_discrete())
            rep.ujqsc_verdict = discrete_verify_ujqsc(*sc.dsignal, static_cast<long long>(*sc.ujqsc_window), sc.steps);
        else
            rep.ujqsc_verdict = verify_ujqsc(*sc.signal, *sc.ujqsc_window);
        rep.checks.push_back({"ujqsc", *rep.ujqsc_verdict, "window " + fmt(*sc.ujqsc_window)});
    }

    if (sc.kind == ScenarioKind::StateFeedback && !tr.diverged()) {
        rep.checks.push_back(check_monotone_envelopes(tr, reducer));
        if (sc.decimate == 1 && sc.dt <= 1e-3 + tol::kTimeEps) {
            const double r = reduction_residual(tr, reducer, *sc.signal);
            rep.checks.push_back({"reduction-residual", r < 1e-4, "max residual " + fmt(r)});
        }
        bool balanced = !sc.robot;
        for (const auto& g : sc.signal->graphs()) balanced = balanced && is_balanced(g);
        if (balanced && rep.consensus) {
            const Vector p = predict_balanced_consensus(*sc.signal, sc.x0, sc.gains);
            const double err = (p - rep.consensus->x_star).cwiseAbs().maxCoeff();
            rep.checks.push_back({"balanced-prediction", err < 1e-3, "deviation " + fmt(err)});
        }
    }

    if (sc.robot && !tr.physical.empty()) {
        const Vector& q = tr.physical.back();
        double q1 = 0.0, q2 = 0.0;
        for (int i = 0; i < sc.agents; ++i) {
            q1 += q(4 * i) / sc.agents;
            q2 += q(4 * i + 2) / sc.agents;
        }
        rep.q1_star = q1;
        rep.q2_star = q2;
        if (rep.consensus) {
            const auto& p = *sc.robot;
            const double gap = std::abs(q2 - q1 - p.mgl() / p.k * std::sin(q1));
            rep.checks.push_back({"equilibrium-identity", gap < 1e-3, "residual " + fmt(gap)});
        }
    }

    if (tr.has_observers() && !tr.diverged()) {
        const double err = (tr.states.back() - tr.observers.back()).cwiseAbs().maxCoeff();
        rep.checks.push_back({"estimation-error", err < sc.consensus_tol, "final max |x - s| " + fmt(err)});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Invariant suites

struct Suite {
    std::string name;
    std::function<std::vector<CheckResult>(std::uint64_t seed)> run;
};

namespace checks_detail {

inline DirectedGraph random_graph(std::mt19937_64& rng, int n, double density, bool unit_weights = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && u(rng) < density) edges.push_back({i, j, unit_weights ? 1.0 : 0.1 + 2.0 * u(rng)});
    return DirectedGraph(n, edges);
}

inline std::vector<double> random_coefficients(std::mt19937_64& rng, int count) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> c(static_cast<std::size_t>(count));
    for (auto& x : c) x = u(rng);
    return c;
}

/// Warshall closure on 0/1 adjacency (sender -> receiver).
inline bool closure_has_center(const DirectedGraph& g) {
    const int n = g.size();
    std::vector<std::vector<bool>> r(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
    for (int i = 0; i < n; ++i) r[i][i] = true;
    for (const auto& e : g.edges()) r[e.sender][e.receiver] = true;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
    for (int i = 0; i < n; ++i) {
        bool all = true;
        for (int j = 0; j < n; ++j) all = all && r[i][j];
        if (all) return true;
    }
    return false;
}

inline CheckResult count_result(const std::string& name, int failures, int cases, const std::string& extra = "") {
    return {name, failures == 0,
            std::to_string(failures) + " failures in " + std::to_string(cases) + " cases" + (extra.empty() ? "" : "; " + extra)};
}

inline std::vector<CheckResult> graph_suite(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nd(1, 5);
    std::vector<CheckResult> out;
    int lap = 0, qsc = 0, strong = 0, uni = 0;
    const int cases = 10000;
    for (int c = 0; c < cases; ++c) {
        const int n = nd(rng);
        const auto g = random_graph(rng, n, 0.4 * std::uniform_real_distribution<double>(0, 1)(rng));
        const Matrix L = laplacian(g);
        if (L.rowwise().sum().cwiseAbs().maxCoeff() > 1e-12) ++lap;
        if (is_quasi_strongly_connected(g) != closure_has_center(g)) ++qsc;
        if (is_strongly_connected(g) && !is_quasi_strongly_connected(g)) ++strong;
        const auto h = random_graph(rng, n, 0.3);
        const auto k = random_graph(rng, n, 0.3);
        if (!(graph_union(g, h) == graph_union(h, g)) ||
            !(graph_union(graph_union(g, h), k) == graph_union(g, graph_union(h, k))) || !(graph_union(g, g) == g))
            ++uni;
    }
    out.push_back(count_result("laplacian-row-sums", lap, cases));
    out.push_back(count_result("quasi-strong-vs-closure", qsc, cases));
    out.push_back(count_result("strong-implies-quasi-strong", strong, cases));
    out.push_back(count_result("union-algebra", uni, cases));
    return out;
}

inline std::vector<CheckResult> switching_suite(std::uint64_t) {
    std::vector<CheckResult> out;
    const SwitchingSignal sig(example1_graphs(), PeriodicSchedule{0.1, {0, 1, 2}}, 60.0);
    out.push_back({"example1-window-0.3", verify_ujqsc(sig, 0.3), "expected true"});
    // every pair of consecutive graphs already has a center, so any window
    // longer than one slot passes; windows shorter than a slot do not
    out.push_back({"example1-window-0.15", verify_ujqsc(sig, 0.15), "expected true (pairwise unions have centers)"});
    out.push_back({"example1-window-0.05", !verify_ujqsc(sig, 0.05), "expected false"});
    bool frozen = true;
    const auto g1 = SwitchingSignal::constant(example1_graphs()[0], 60.0);
    for (double T : {0.1, 0.3, 1.0, 10.0, 60.0}) frozen = frozen && !verify_ujqsc(g1, T);
    out.push_back({"frozen-G1-never", frozen, "expected false at every window"});
    const DiscreteSwitchingSignal ds(ring_split_graphs(4), {0, 1, 2, 3});
    out.push_back({"ring-discrete-M2", discrete_verify_ujqsc(ds, 2, 400) && !discrete_verify_ujqsc(ds, 1, 400),
                   "true at M = 2 (three ring edges form a spanning path), false at M = 1"});
    return out;
}

inline std::vector<CheckResult> lti_suite(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<CheckResult> out;
    int expo = 0, cp = 0, canon = 0;
    const int cases = 200;
    for (int c = 0; c < cases; ++c) {
        const int n = 2 + c % 5;
        Matrix M(n, n);
        for (Eigen::Index k = 0; k < M.size(); ++k) M(k) = u(rng);
        // exp(M) exp(-M) = I and exp(2M) = exp(M)^2
        const Matrix E = mat_exp(M);
        if ((E * mat_exp(-M) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10 ||
            (mat_exp(M, 2.0) - E * E).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, E.norm() * E.norm()))
            ++expo;
        // the characteristic polynomial annihilates its matrix
        const Matrix Z = char_poly(M).evaluate(M);
        if (Z.cwiseAbs().maxCoeff() > 1e-9) ++cp;
        LTISystem sys{M, Vector::NullaryExpr(n, [&] { return u(rng); }), RowVector::NullaryExpr(n, [&] { return u(rng); })};
        if (is_controllable(sys) && std::abs(controllability_matrix(sys).determinant()) > 1e-3) {
            if (!satisfies_canonical_shape(sys, to_controllable_canonical(sys))) ++canon;
        }
    }
    out.push_back(count_result("mat-exp-identities", expo, cases));
    out.push_back(count_result("cayley-hamilton", cp, cases));
    out.push_back(count_result("canonical-shape", canon, cases));
    return out;
}

inline std::vector<CheckResult> gains_suite(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<CheckResult> out;
    int ident = 0, hur = 0, sch = 0;
    double worst = 0.0;
    for (int c = 0; c < 100; ++c) {
        const int m = 2 + c % 7;
        const auto coeffs = random_coefficients(rng, m - 1);
        const auto chain = integrator_chain(m);
        const auto cg = make_continuous_gains(coeffs);
        const auto dg = make_discrete_gains(coeffs);
        const double e1 = (cg.K2 * (chain.A + chain.B * cg.K1)).cwiseAbs().maxCoeff();
        const double e2 = std::abs(cg.K2.dot(chain.B) - 1.0);
        const double e3 = (dg.K5 * (chain.A + chain.B * dg.K4) - dg.K5).cwiseAbs().maxCoeff();
        worst = std::max({worst, e1, e2, e3});
        if (std::max({e1, e2, e3}) >= 1e-12) ++ident;
    }
    out.push_back(count_result("gain-identities", ident, 100, "worst " + fmt(worst)));
    std::uniform_int_distribution<int> deg(1, 6);
    for (int c = 0; c < 1000; ++c) {
        const auto p = Polynomial(random_coefficients(rng, deg(rng)));
        const auto roots = poly_roots(p);
        double re = -1e300, mod = 0.0;
        for (const auto& z : roots) {
            re = std::max(re, z.real());
            mod = std::max(mod, std::abs(z));
        }
        // skip cases within numerical reach of the boundary
        if (std::abs(re) > 1e-6 && is_hurwitz(p) != (re < 0.0)) ++hur;
        if (std::abs(mod - 1.0) > 1e-6 && is_schur(p) != (mod < 1.0)) ++sch;
    }
    out.push_back(count_result("hurwitz-vs-roots", hur, 1000));
    out.push_back(count_result("schur-vs-roots", sch, 1000));
    return out;
}

inline std::vector<CheckResult> analysis_suite(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<CheckResult> out;
    int stoch = 0;
    for (int c = 0; c < 50; ++c) {
        const auto g = random_graph(rng, 2 + c % 5, 0.4);
        for (double d : {0.01, 0.1, 1.0})
            if (!is_stochastic(mat_exp(-laplacian(g), d), 1e-9)) ++stoch;
    }
    out.push_back(count_result("exp-laplacian-stochastic", stoch, 150));

    auto random_stochastic = [&](int n) {
        Matrix P(n, n);
        for (Eigen::Index k = 0; k < P.size(); ++k) P(k) = u(rng) < 0.3 ? 0.0 : u(rng);
        for (int i = 0; i < n; ++i) {
            if (P.row(i).sum() == 0.0) P(i, i) = 1.0;
            P.row(i) /= P.row(i).sum();
        }
        return P;
    };
    int contraction = 0, submult = 0;
    for (int c = 0; c < 10000; ++c) {
        const int n = 2 + c % 6;
        const Matrix P = random_stochastic(n);
        const Matrix Q = random_stochastic(n);
        const Vector r = Vector::NullaryExpr(n, [&] { return 10.0 * (u(rng) - 0.5); });
        if (disagreement(P * r) > ergodicity_coefficient(P) * disagreement(r) + 1e-12) ++contraction;
        if (ergodicity_coefficient(P * Q) > ergodicity_coefficient(P) * ergodicity_coefficient(Q) + 1e-12) ++submult;
    }
    out.push_back(count_result("disagreement-contraction", contraction, 10000));
    out.push_back(count_result("tau-submultiplicative", submult, 10000));

    const SwitchingSignal sig(example1_graphs(), PeriodicSchedule{0.1, {0, 1, 2}}, 60.0);
    int semigroup = 0;
    for (int c = 0; c < 50; ++c) {
        double a = 5.0 * u(rng), b = 5.0 * u(rng), d = 5.0 * u(rng);
        if (a > b) std::swap(a, b);
        if (b > d) std::swap(b, d);
        if (a > b) std::swap(a, b);
        const Matrix lhs = continuous_transition(sig, d, a);
        const Matrix rhs = continuous_transition(sig, d, b) * continuous_transition(sig, b, a);
        if (!is_stochastic(lhs) || (lhs - rhs).cwiseAbs().maxCoeff() > 1e-8 || lhs.norm() > 5.0) ++semigroup;
    }
    out.push_back(count_result("transition-semigroup", semigroup, 50));
    return out;
}

inline std::vector<CheckResult> engine_suite(std::uint64_t) {
    std::vector<CheckResult> out;
    const std::vector<double> a{1.0, 3.0, 3.0};
    const auto l1 = lemma1_oracle(a, [](double t) { return 2.0 + std::exp(-t); }, std::vector<double>{0.5, -1.0, 2.0}, 40.0);
    Vector target1(3);
    target1 << 2.0, 0.0, 0.0;
    const double e1 = (l1.final - target1).cwiseAbs().maxCoeff();
    out.push_back({"scalar-limit-continuous", !l1.diverged && e1 < 1e-4, "error " + fmt(e1)});
    const std::vector<double> b{1.0 / 8.0, 3.0 / 4.0, 3.0 / 2.0};
    const auto l3 = lemma3_oracle(b, [](long long) { return 1.0; }, std::vector<double>{0.0, 0.0, 0.0}, 200);
    const double e3 = std::abs(l3.final(0) - 8.0 / 27.0);
    out.push_back({"scalar-limit-discrete", !l3.diverged && e3 < 1e-6, "error " + fmt(e3)});

    // determinism: two identical runs agree bitwise
    Scenario sc = example1_scenario();
    sc.set_duration(2.0);
    const auto t1 = simulate(sc);
    const auto t2 = simulate(sc);
    bool same = t1.size() == t2.size();
    for (std::size_t k = 0; same && k < t1.size(); ++k) same = (t1.states[k].array() == t2.states[k].array()).all();
    out.push_back({"determinism", same, "two runs of a 2 s robot scenario"});

    out.push_back(check_necessity(simulate(necessity_scenario()), necessity_scenario()));
    return out;
}

inline std::vector<CheckResult> scenarios_suite(std::uint64_t seed) {
    std::vector<CheckResult> out;
    for (const auto& name : builtin_scenario_names()) {
        if (name == "necessity") continue;  // diverges by design; see engine/necessity
        const Scenario sc = builtin_scenario(name, seed);
        const auto tr = simulate(sc);
        for (auto c : analyze_run(sc, tr).checks) {
            c.name = name + "/" + c.name;
            out.push_back(std::move(c));
        }
    }
    return out;
}

}  // namespace checks_detail

inline const std::vector<Suite>& check_suites() {
    static const std::vector<Suite> suites{
        {"graph", checks_detail::graph_suite},       {"switching", checks_detail::switching_suite},
        {"lti", checks_detail::lti_suite},           {"gains", checks_detail::gains_suite},
        {"analysis", checks_detail::analysis_suite}, {"engine", checks_detail::engine_suite},
        {"scenarios", checks_detail::scenarios_suite},
    };
    return suites;
}

}  // namespace hiord

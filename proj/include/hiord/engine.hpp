#pragma once

// Deterministic simulation of consensus scenarios, consensus detection and the
// numerical oracles for the scalar chain limits.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "gains.hpp"
#include "graph.hpp"
#include "lti_tools.hpp"
#include "plants.hpp"
#include "protocols.hpp"
#include "switching.hpp"
#include "tolerances.hpp"

namespace hiord {

enum class ScenarioKind { StateFeedback, OutputFeedback, GeneralLti, Discrete };

inline const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::StateFeedback: return "continuous-state-feedback";
        case ScenarioKind::OutputFeedback: return "continuous-output-feedback";
        case ScenarioKind::GeneralLti: return "general-lti";
        case ScenarioKind::Discrete: return "discrete";
    }
    return "?";
}

/**
 * Everything needed to run one experiment.
 *
 * `plant` is the linear agent model (the integrator chain for every kind except
 * GeneralLti). When `robot` is set the agents are flexible-joint robots driven
 * through feedback linearization and `x0` holds physical states
 * (q1, dq1, q2, dq2) per agent; otherwise `x0` holds linear states.
 */
struct Scenario {
    std::string name;
    ScenarioKind kind = ScenarioKind::StateFeedback;
    int agents = 0;
    int order = 0;

    ContinuousGainSet gains;            // continuous kinds
    DiscreteGainSet discrete_gains;     // discrete kind
    LTISystem plant;
    std::optional<CanonicalForm> canon;  // GeneralLti
    std::optional<FlexibleJointParams> robot;

    std::optional<SwitchingSignal> signal;            // continuous kinds
    std::optional<DiscreteSwitchingSignal> dsignal;   // discrete kind

    Vector x0;
    Vector s0;  // observer initial states (output-feedback, general-lti, discrete)

    double dt = tol::kDefaultDt;
    double duration = 0.0;
    long long steps = 0;
    int decimate = 1;

    double consensus_tol = tol::kConsensus;
    double consensus_window_fraction = tol::kConsensusWindowFraction;

    // Window T (seconds, or steps for discrete signals) for the joint-connectivity check.
    std::optional<double> ujqsc_window;

    bool has_observer() const { return kind != ScenarioKind::StateFeedback; }

    /// Sets the run length of a continuous scenario and stretches the signal horizon to match.
    void set_duration(double t) {
        require(signal.has_value(), "Scenario: set_duration needs a continuous switching signal");
        require(t > 0.0, "Scenario: duration must be positive");
        SwitchingSignal resized(signal->graphs(), signal->schedule(), t);
        signal.emplace(std::move(resized));
        duration = t;
    }
    bool is_discrete() const { return kind == ScenarioKind::Discrete; }

    void validate() const {
        require(agents >= 1 && order >= 2, "Scenario: need at least one agent and order >= 2");
        plant.validate();
        require(plant.order() == order, "Scenario: plant order mismatch");
        const Eigen::Index phys = robot ? 4 : order;
        require(x0.size() == agents * phys, "Scenario: initial state dimension mismatch");
        if (robot) {
            require(kind == ScenarioKind::StateFeedback && order == 4,
                    "Scenario: flexible-joint plants need order 4 and state feedback");
            robot->validate();
        }
        if (has_observer()) require(s0.size() == agents * order, "Scenario: observer initial state dimension mismatch");
        if (is_discrete()) {
            require(dsignal.has_value(), "Scenario: discrete scenario needs a step-indexed switching signal");
            require(dsignal->node_count() == agents, "Scenario: signal node count mismatch");
            require(discrete_gains.m == order && discrete_gains.K6.has_value(), "Scenario: discrete gains incomplete");
            require(steps >= 1, "Scenario: step count must be positive");
        } else {
            require(signal.has_value(), "Scenario: continuous scenario needs a switching signal");
            require(signal->node_count() == agents, "Scenario: signal node count mismatch");
            require(gains.m == order, "Scenario: gain order mismatch");
            require(dt > 0.0, "Scenario: dt must be positive");
            require(dt <= signal->dwell_time() + tol::kTimeEps, "Scenario: dt exceeds the dwell time");
            require(duration > 0.0 && duration <= signal->horizon() + tol::kTimeEps,
                    "Scenario: duration must be positive and within the signal horizon");
            if (has_observer()) require(gains.K3.has_value(), "Scenario: observer gain K3 missing");
            if (kind == ScenarioKind::GeneralLti) require(canon.has_value(), "Scenario: canonical form missing");
        }
        require(decimate >= 1, "Scenario: decimation factor must be positive");
    }
};

/// Sampled run. `states` are linear-coordinate stacks (N*m); `physical` holds
/// robot joint states when the plant is nonlinear.
struct Trajectory {
    int agents = 0;
    int order = 0;
    bool discrete = false;
    std::vector<double> times;  // seconds, or step numbers for discrete runs
    std::vector<int> graph_index;
    std::vector<Vector> states;
    std::vector<Vector> observers;
    std::vector<Vector> inputs;
    std::vector<Vector> physical;
    std::optional<double> diverged_at;

    std::size_t size() const { return times.size(); }
    bool has_observers() const { return !observers.empty(); }
    bool diverged() const { return diverged_at.has_value(); }
};

/// One classical fourth-order Runge-Kutta step.
template <class Rhs>
Vector rk4_step(Rhs&& f, const Vector& y, double h) {
    const Vector k1 = f(y);
    const Vector k2 = f(y + 0.5 * h * k1);
    const Vector k3 = f(y + 0.5 * h * k2);
    const Vector k4 = f(y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace detail {

inline bool exceeds_guard(const Vector& y) {
    for (Eigen::Index k = 0; k < y.size(); ++k)
        if (!std::isfinite(y(k)) || std::abs(y(k)) > tol::kDivergenceGuard) return true;
    return false;
}

/// Packs plant and observer states into one ODE state and evaluates the closed loop.
class ContinuousLoop {
public:
    explicit ContinuousLoop(const Scenario& sc) : sc_(sc), n_(sc.agents), m_(sc.order), p_(sc.robot ? 4 : sc.order) {}

    Eigen::Index plant_size() const { return static_cast<Eigen::Index>(n_) * p_; }

    Vector pack(const Vector& plant, const Vector& observer) const {
        Vector y(plant_size() + (sc_.has_observer() ? n_ * m_ : 0));
        y.head(plant_size()) = plant;
        if (sc_.has_observer()) y.tail(n_ * m_) = observer;
        return y;
    }

    Vector linear_states(const Vector& y) const {
        if (!sc_.robot) return y.head(plant_size());
        Vector X(n_ * m_);
        for (int i = 0; i < n_; ++i) {
            const auto q = y.segment(i * 4, 4);
            X.segment(i * m_, m_) = fl_state(q(0), q(1), q(2), q(3), *sc_.robot);
        }
        return X;
    }

    Vector observers(const Vector& y) const { return sc_.has_observer() ? Vector(y.tail(n_ * m_)) : Vector(); }

    Vector inputs(const Vector& X, const Vector& S, const DirectedGraph& g) const {
        Vector u(n_);
        for (int i = 0; i < n_; ++i) {
            switch (sc_.kind) {
                case ScenarioKind::StateFeedback: u(i) = u_state_feedback(i, X, g, sc_.gains); break;
                case ScenarioKind::OutputFeedback: u(i) = u_output_feedback(i, S, g, sc_.gains); break;
                case ScenarioKind::GeneralLti: u(i) = u_general_lti(i, S, g, sc_.gains, *sc_.canon); break;
                case ScenarioKind::Discrete: throw Error("ContinuousLoop: discrete scenario");
            }
        }
        return u;
    }

    Vector rhs(const Vector& y, const DirectedGraph& g) const {
        const Vector X = linear_states(y);
        const Vector S = observers(y);
        const Vector u = inputs(X, S, g);
        Vector dy(y.size());
        for (int i = 0; i < n_; ++i) {
            if (sc_.robot) {
                const auto q = y.segment(i * 4, 4);
                const double tau = fl_control(u(i), q(0), q(1), q(2), q(3), *sc_.robot);
                const auto acc = robot_rhs(q(0), q(2), q(1), q(3), tau, *sc_.robot);
                dy.segment(i * 4, 4) << q(1), acc.ddq1, q(3), acc.ddq2;
            } else {
                dy.segment(i * m_, m_) = sc_.plant.A * X.segment(i * m_, m_) + sc_.plant.B * u(i);
            }
            if (sc_.has_observer()) {
                const Vector si = S.segment(i * m_, m_);
                const double yi = sc_.plant.C.dot(X.segment(i * m_, m_));
                dy.segment(plant_size() + i * m_, m_) = observer_rhs(si, u(i), yi, sc_.plant, *sc_.gains.K3);
            }
        }
        return dy;
    }

private:
    const Scenario& sc_;
    int n_;
    int m_;
    int p_;
};

}  // namespace detail

/**
 * Fixed-step RK4 over the switch segments of the signal. Each segment is split
 * into equal substeps no longer than dt, so no step straddles a switch.
 */
inline Trajectory simulate_continuous(const Scenario& sc) {
    sc.validate();
    require(!sc.is_discrete(), "simulate_continuous: scenario is discrete");
    const detail::ContinuousLoop loop(sc);
    const auto& sig = *sc.signal;

    Trajectory tr;
    tr.agents = sc.agents;
    tr.order = sc.order;

    auto record = [&](double t, const Vector& y) {
        const int gi = sig.index_at(std::min(t, sig.horizon()));
        const Vector X = loop.linear_states(y);
        const Vector S = loop.observers(y);
        tr.times.push_back(t);
        tr.graph_index.push_back(gi);
        tr.inputs.push_back(loop.inputs(X, S, sig.graphs()[static_cast<std::size_t>(gi)]));
        tr.states.push_back(X);
        if (sc.has_observer()) tr.observers.push_back(S);
        if (sc.robot) tr.physical.push_back(y.head(loop.plant_size()));
    };

    Vector y = loop.pack(sc.x0, sc.s0);
    double t = 0.0;
    long long step = 0;
    record(t, y);
    const double eps = tol::kTimeEps * std::max(1.0, sc.duration);
    while (t < sc.duration - eps) {
        const int seg = sig.segment_at(t + eps);
        const double seg_end = std::min(sig.segment_end(seg), sc.duration);
        const DirectedGraph& g = sig.graphs()[static_cast<std::size_t>(sig.segment_graph(seg))];
        const double t_begin = t;
        const auto substeps = std::max<long long>(1, static_cast<long long>(std::ceil((seg_end - t_begin) / sc.dt - 1e-9)));
        const double h = (seg_end - t_begin) / static_cast<double>(substeps);
        for (long long k = 1; k <= substeps; ++k) {
            y = rk4_step([&](const Vector& v) { return loop.rhs(v, g); }, y, h);
            t = k == substeps ? seg_end : t_begin + static_cast<double>(k) * h;
            ++step;
            if (detail::exceeds_guard(y)) {
                tr.diverged_at = t;
                return tr;
            }
            if (step % sc.decimate == 0 || t >= sc.duration - eps) record(t, y);
        }
    }
    return tr;
}

/// Exact recursion of the discrete observer-based protocol.
inline Trajectory simulate_discrete(const Scenario& sc) {
    sc.validate();
    require(sc.is_discrete(), "simulate_discrete: scenario is continuous");
    const int n = sc.agents;
    const int m = sc.order;
    const auto& sig = *sc.dsignal;
    const auto& gains = sc.discrete_gains;

    Trajectory tr;
    tr.agents = n;
    tr.order = m;
    tr.discrete = true;

    Vector X = sc.x0;
    Vector Z = sc.s0;
    auto inputs_at = [&](long long k) {
        const auto& g = sig.graph_at(k);
        Vector u(n);
        for (int i = 0; i < n; ++i) u(i) = u_discrete(i, Z, g, gains);
        return u;
    };
    auto graph_for = [&](long long k) {
        if (sig.mode() == DiscreteSwitchingSignal::Mode::Explicit)
            k = std::min<long long>(k, static_cast<long long>(sig.sequence().size()) - 1);
        return k;
    };
    auto record = [&](long long k, const Vector& u) {
        tr.times.push_back(static_cast<double>(k));
        tr.graph_index.push_back(sig.index_at(graph_for(k)));
        tr.states.push_back(X);
        tr.observers.push_back(Z);
        tr.inputs.push_back(u);
    };

    for (long long k = 0; k < sc.steps; ++k) {
        const Vector u = inputs_at(k);
        if (k % sc.decimate == 0) record(k, u);
        Vector Xn(X.size());
        Vector Zn(Z.size());
        for (int i = 0; i < n; ++i) {
            const Vector xi = X.segment(i * m, m);
            Xn.segment(i * m, m) = sc.plant.A * xi + sc.plant.B * u(i);
            Zn.segment(i * m, m) = discrete_observer_step(Z.segment(i * m, m), u(i), sc.plant.C.dot(xi), sc.plant, *gains.K6);
        }
        X = std::move(Xn);
        Z = std::move(Zn);
        if (detail::exceeds_guard(X) || detail::exceeds_guard(Z)) {
            tr.diverged_at = static_cast<double>(k + 1);
            return tr;
        }
    }
    record(sc.steps, inputs_at(graph_for(sc.steps)));
    return tr;
}

inline Trajectory simulate(const Scenario& sc) { return sc.is_discrete() ? simulate_discrete(sc) : simulate_continuous(sc); }

/// max_i p_i - min_i p_i
inline double disagreement(const Vector& p) {
    require(p.size() >= 1, "disagreement: empty vector");
    return p.maxCoeff() - p.minCoeff();
}

/// Per-sample disagreement of the reduced states K x_i.
inline std::vector<double> disagreement_series(const Trajectory& tr, const RowVector& reducer) {
    std::vector<double> out;
    out.reserve(tr.size());
    for (const auto& X : tr.states) out.push_back(disagreement(reduce(X, reducer)));
    return out;
}

/// Per-sample, per-component disagreement of the full states.
inline std::vector<Vector> component_disagreement(const Trajectory& tr) {
    std::vector<Vector> out;
    out.reserve(tr.size());
    const int m = tr.order;
    for (const auto& X : tr.states) {
        const Eigen::Map<const Matrix> per_agent(X.data(), m, tr.agents);  // column i = agent i
        out.push_back(per_agent.rowwise().maxCoeff() - per_agent.rowwise().minCoeff());
    }
    return out;
}

struct ConsensusResult {
    Vector x_star;        // mean final agent state
    double settle_time = 0.0;
};

/**
 * Earliest sample from which, through the end of the run, all agents agree
 * componentwise within `tolerance` and no state moves more than `tolerance`
 * from its final value. The settled stretch must cover at least `window`.
 */
inline std::optional<ConsensusResult> detect_consensus(const Trajectory& tr, double tolerance, double window) {
    require(tolerance > 0.0, "detect_consensus: tolerance must be positive");
    if (tr.diverged() || tr.size() == 0) return std::nullopt;
    const Vector& last = tr.states.back();
    const auto spreads = component_disagreement(tr);
    std::size_t settle = tr.size();
    for (std::size_t k = tr.size(); k-- > 0;) {
        const double spread = spreads[k].size() ? spreads[k].maxCoeff() : 0.0;
        const double movement = (tr.states[k] - last).cwiseAbs().maxCoeff();
        if (spread >= tolerance || movement >= tolerance) break;
        settle = k;
    }
    if (settle == tr.size()) return std::nullopt;
    if (tr.times.back() - tr.times[settle] < window && settle != 0) return std::nullopt;

    ConsensusResult res;
    const Eigen::Map<const Matrix> per_agent(last.data(), tr.order, tr.agents);
    res.x_star = per_agent.rowwise().mean();
    res.settle_time = tr.times[settle];
    return res;
}

/// Consensus limit for balanced signals: (mean_i K2 x_i(0) / a_1, 0, ..., 0).
inline Vector predict_balanced_consensus(const SwitchingSignal& sig, const Vector& X0, const ContinuousGainSet& gains) {
    for (const auto& g : sig.graphs())
        require(is_balanced(g), "predict_balanced_consensus: switching signal contains an unbalanced graph");
    require(X0.size() == static_cast<Eigen::Index>(sig.node_count()) * gains.m,
            "predict_balanced_consensus: initial state dimension mismatch");
    Vector x = Vector::Zero(gains.m);
    x(0) = reduce(X0, gains.K2).mean() / gains.a.front();
    return x;
}

struct LemmaOutcome {
    Vector final;  // (r, r', ..., r^{(m-2)}) or (r[k_end])
    bool diverged = false;
};

/**
 * Integrates r^{(m-1)} + a_{m-1} r^{(m-2)} + ... + a_1 r = f(t) in companion
 * form with RK4 and returns the final (r, ..., r^{(m-2)}).
 */
inline LemmaOutcome lemma1_oracle(std::span<const double> a, const std::function<double(double)>& f,
                                  std::span<const double> initial, double t_end, double dt = tol::kDefaultDt) {
    require(!a.empty() && initial.size() == a.size(), "lemma1_oracle: need m-1 coefficients and m-1 initial values");
    require(t_end >= 0.0 && dt > 0.0, "lemma1_oracle: invalid horizon or step");
    const Polynomial p{std::vector<double>(a.begin(), a.end())};
    const Matrix Ar = p.companion();
    const auto d = Ar.rows();
    Vector r = Eigen::Map<const Vector>(initial.data(), d);
    const auto n = std::max<long long>(1, static_cast<long long>(std::ceil(t_end / dt - 1e-9)));
    const double h = t_end / static_cast<double>(n);
    LemmaOutcome out;
    for (long long k = 0; k < n; ++k) {
        const double t0 = static_cast<double>(k) * h;
        // f enters the last row only; RK4 with time-dependent forcing
        auto rhs = [&](double t, const Vector& v) {
            Vector dv = Ar * v;
            dv(d - 1) += f(t);
            return dv;
        };
        const Vector k1 = rhs(t0, r);
        const Vector k2 = rhs(t0 + 0.5 * h, r + 0.5 * h * k1);
        const Vector k3 = rhs(t0 + 0.5 * h, r + 0.5 * h * k2);
        const Vector k4 = rhs(t0 + h, r + h * k3);
        r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (detail::exceeds_guard(r)) {
            out.diverged = true;
            break;
        }
    }
    out.final = r;
    return out;
}

/// Iterates r[k+m-1] = f[k] - b_{m-1} r[k+m-2] - ... - b_1 r[k]; returns r[k_end].
inline LemmaOutcome lemma3_oracle(std::span<const double> b, const std::function<double(long long)>& f,
                                  std::span<const double> initial, long long k_end) {
    require(!b.empty() && initial.size() == b.size(), "lemma3_oracle: need m-1 coefficients and m-1 initial values");
    const auto d = static_cast<long long>(b.size());
    require(k_end >= 0, "lemma3_oracle: negative horizon");
    std::vector<double> r(initial.begin(), initial.end());
    LemmaOutcome out;
    for (long long k = 0; k + d <= k_end; ++k) {
        double next = f(k);
        for (long long j = 0; j < d; ++j) next -= b[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(k + j)];
        r.push_back(next);
        if (!std::isfinite(next) || std::abs(next) > tol::kDivergenceGuard) {
            out.diverged = true;
            break;
        }
    }
    out.final = Vector::Constant(1, r[std::min(static_cast<std::size_t>(k_end), r.size() - 1)]);
    return out;
}

struct ResidualSample {
    double time = 0.0;
    double value = 0.0;  // || d(K X)/dt + L (K X) ||_inf
};

/**
 * Residual of the reduced first-order dynamics at every sample whose two
 * neighbours on each side lie in the same switch segment. The derivative uses
 * the five-point stencil, so its truncation error is O(h^4) and the residual
 * measures the dynamics rather than the difference formula. With
 * `use_observers` the observer stack is reduced instead of the plant states,
 * so the residual equals the disturbance term of the output-feedback loop.
 */
inline std::vector<ResidualSample> reduction_residual_series(const Trajectory& tr, const RowVector& K,
                                                             const SwitchingSignal& sig, bool use_observers = false) {
    require(!tr.discrete, "reduction_residual: continuous trajectories only");
    const auto& series = use_observers ? tr.observers : tr.states;
    require(series.size() == tr.size(), "reduction_residual: requested series is not recorded");
    std::vector<ResidualSample> out;
    for (std::size_t k = 2; k + 2 < tr.size(); ++k) {
        const double t0 = tr.times[k - 2];
        const double t4 = tr.times[k + 2];
        const int seg = sig.segment_at(t0 + tol::kTimeEps);
        if (sig.segment_at(t4 - tol::kTimeEps) != seg) continue;
        if (sig.segment_start(seg) > t0 + tol::kTimeEps) continue;
        const double h = (t4 - t0) / 4.0;
        // the stencil assumes a uniform grid
        if (std::abs(tr.times[k] - t0 - 2.0 * h) > 1e-6 * h || std::abs(tr.times[k - 1] - t0 - h) > 1e-6 * h) continue;
        const Vector d = (reduce(series[k - 2], K) - 8.0 * reduce(series[k - 1], K) + 8.0 * reduce(series[k + 1], K) -
                          reduce(series[k + 2], K)) /
                         (12.0 * h);
        const Matrix L = laplacian(sig.graphs()[static_cast<std::size_t>(sig.segment_graph(seg))]);
        const Vector r = d + L * reduce(series[k], K);
        out.push_back({tr.times[k], r.cwiseAbs().maxCoeff()});
    }
    return out;
}

inline double reduction_residual(const Trajectory& tr, const RowVector& K, const SwitchingSignal& sig,
                                 bool use_observers = false) {
    double worst = 0.0;
    for (const auto& s : reduction_residual_series(tr, K, sig, use_observers)) worst = std::max(worst, s.value);
    return worst;
}

}  // namespace hiord

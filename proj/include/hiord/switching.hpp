#pragma once

// Piecewise-constant topology signals in continuous time and in steps, with
// dwell-time validation and joint-connectivity verification.

#include <algorithm>
#include <cmath>
#include <set>
#include <variant>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "tolerances.hpp"

namespace hiord {

/// Graph cycle[k mod len] is active on [k*slot, (k+1)*slot).
struct PeriodicSchedule {
    double slot = 0.1;
    std::vector<int> cycle;  // zero-based graph indices
};

/// Graph indices[k] is active on [times[k], times[k+1]); times[0] must be 0.
struct ExplicitSchedule {
    std::vector<double> times;
    std::vector<int> indices;
};

using Schedule = std::variant<PeriodicSchedule, ExplicitSchedule>;

struct WindowCheck {
    double start = 0.0;
    double end = 0.0;
    std::vector<int> active;  // zero-based graph indices seen in the window
    bool connected = false;
    std::vector<int> centers;
};

struct UjqscReport {
    double window = 0.0;
    double horizon = 0.0;
    bool horizon_limited = false;  // true for explicit schedules
    std::vector<WindowCheck> windows;
    bool verdict = false;
};

class SwitchingSignal {
public:
    SwitchingSignal(std::vector<DirectedGraph> graphs, Schedule schedule, double horizon)
        : graphs_(std::move(graphs)), schedule_(std::move(schedule)), horizon_(horizon) {
        require(!graphs_.empty(), "SwitchingSignal: no graphs");
        require(horizon_ > 0.0 && std::isfinite(horizon_), "SwitchingSignal: horizon must be positive");
        const int n = graphs_.front().size();
        for (const auto& g : graphs_) require(g.size() == n, "SwitchingSignal: graphs have different node counts");
        auto check_index = [&](int k) {
            require(k >= 0 && k < static_cast<int>(graphs_.size()), "SwitchingSignal: graph index out of range");
        };
        if (const auto* p = std::get_if<PeriodicSchedule>(&schedule_)) {
            require(p->slot > 0.0, "SwitchingSignal: slot must be positive");
            require(!p->cycle.empty(), "SwitchingSignal: empty cycle");
            for (int k : p->cycle) check_index(k);
        } else {
            const auto& e = std::get<ExplicitSchedule>(schedule_);
            require(!e.times.empty() && e.times.size() == e.indices.size(),
                    "SwitchingSignal: explicit schedule needs matching, non-empty times and indices");
            require(e.times.front() == 0.0, "SwitchingSignal: explicit schedule must start at t = 0");
            for (std::size_t k = 1; k < e.times.size(); ++k)
                require(e.times[k] > e.times[k - 1], "SwitchingSignal: switch times must be strictly increasing");
            for (int k : e.indices) check_index(k);
        }
    }

    static SwitchingSignal constant(DirectedGraph g, double horizon) {
        return SwitchingSignal({std::move(g)}, ExplicitSchedule{{0.0}, {0}}, horizon);
    }

    const std::vector<DirectedGraph>& graphs() const { return graphs_; }
    const Schedule& schedule() const { return schedule_; }
    double horizon() const { return horizon_; }
    int node_count() const { return graphs_.front().size(); }
    bool is_periodic() const { return std::holds_alternative<PeriodicSchedule>(schedule_); }

    /// Cycle length in seconds for periodic schedules, horizon otherwise.
    double period() const {
        if (const auto* p = std::get_if<PeriodicSchedule>(&schedule_))
            return p->slot * static_cast<double>(p->cycle.size());
        return horizon_;
    }

    /// Minimum dwell time between consecutive switches.
    double dwell_time() const {
        if (const auto* p = std::get_if<PeriodicSchedule>(&schedule_)) return p->slot;
        const auto& e = std::get<ExplicitSchedule>(schedule_);
        double d = horizon_ - e.times.back();
        for (std::size_t k = 1; k < e.times.size(); ++k) d = std::min(d, e.times[k] - e.times[k - 1]);
        return d;
    }

    /// Right-continuous segment index of t: segment k covers [t_k, t_{k+1}).
    int segment_at(double t) const {
        if (const auto* p = std::get_if<PeriodicSchedule>(&schedule_)) {
            // t = 0.3 with slot 0.1 means the switch at 3 * 0.1, not a point just before it
            const double snap = 1e-12 * std::max(1.0, std::abs(t));
            auto k = static_cast<long long>(std::floor(t / p->slot));
            while (static_cast<double>(k + 1) * p->slot <= t + snap) ++k;
            while (k > 0 && static_cast<double>(k) * p->slot > t + snap) --k;
            return static_cast<int>(std::max<long long>(k, 0));
        }
        const auto& e = std::get<ExplicitSchedule>(schedule_);
        return static_cast<int>(std::upper_bound(e.times.begin(), e.times.end(), t) - e.times.begin()) - 1;
    }

    double segment_start(int k) const {
        if (const auto* p = std::get_if<PeriodicSchedule>(&schedule_)) return static_cast<double>(k) * p->slot;
        return std::get<ExplicitSchedule>(schedule_).times.at(static_cast<std::size_t>(k));
    }

    /// End of segment k (the next switch time, or +inf for the last explicit segment).
    double segment_end(int k) const {
        if (const auto* p = std::get_if<PeriodicSchedule>(&schedule_)) return static_cast<double>(k + 1) * p->slot;
        const auto& e = std::get<ExplicitSchedule>(schedule_);
        const auto next = static_cast<std::size_t>(k) + 1;
        return next < e.times.size() ? e.times[next] : INFINITY;
    }

    int segment_graph(int k) const {
        if (const auto* p = std::get_if<PeriodicSchedule>(&schedule_))
            return p->cycle[static_cast<std::size_t>(k) % p->cycle.size()];
        return std::get<ExplicitSchedule>(schedule_).indices.at(static_cast<std::size_t>(k));
    }

    int index_at(double t) const {
        require(t >= -tol::kTimeEps && t <= horizon_ + tol::kTimeEps, "graph_at: time outside the signal horizon");
        return segment_graph(segment_at(std::max(t, 0.0)));
    }

    const DirectedGraph& graph_at(double t) const { return graphs_[static_cast<std::size_t>(index_at(t))]; }

    /// Switch instants strictly inside (t0, t1).
    std::vector<double> switch_times_in(double t0, double t1) const {
        require(t0 <= t1, "switch_times_in: t0 > t1");
        std::vector<double> out;
        for (int k = segment_at(std::max(t0, 0.0)) + 1;; ++k) {
            if (!is_periodic() && k >= static_cast<int>(std::get<ExplicitSchedule>(schedule_).times.size())) break;
            const double s = segment_start(k);
            if (s >= t1) break;
            if (s > t0) out.push_back(s);
        }
        return out;
    }

    /// Graph indices active somewhere on [t0, t1). Endpoints within kTimeEps
    /// of a switch are snapped onto it.
    std::vector<int> indices_active_in(double t0, double t1) const {
        std::set<int> idx;
        int k = segment_at(snap(t0));
        const double end = snap(t1);
        do {
            idx.insert(segment_graph(k));
            ++k;
            if (!is_periodic() && k >= static_cast<int>(std::get<ExplicitSchedule>(schedule_).times.size())) break;
        } while (segment_start(k) < end);
        return {idx.begin(), idx.end()};
    }

    DirectedGraph union_over(double t0, double t1) const {
        std::vector<DirectedGraph> gs;
        for (int k : indices_active_in(t0, t1)) gs.push_back(graphs_[static_cast<std::size_t>(k)]);
        return graph_union(gs);
    }

private:
    double snap(double t) const {
        const int k = segment_at(std::max(t, 0.0));
        for (int j : {k, k + 1}) {
            if (!is_periodic() && j >= static_cast<int>(std::get<ExplicitSchedule>(schedule_).times.size())) continue;
            const double s = segment_start(j);
            if (std::abs(s - t) <= tol::kTimeEps * std::max(1.0, std::abs(t))) return s;
        }
        return t;
    }

    std::vector<DirectedGraph> graphs_;
    Schedule schedule_;
    double horizon_;
};

/// Union over [t, t+T) checked at every critical window start up to the horizon.
inline UjqscReport ujqsc_report(const SwitchingSignal& sig, double T) {
    require(T > 0.0, "verify_ujqsc: window length must be positive");
    UjqscReport rep;
    rep.window = T;
    rep.horizon = sig.horizon();
    rep.horizon_limited = !sig.is_periodic();

    const auto switches = sig.switch_times_in(0.0, sig.horizon());
    std::vector<double> starts{0.0};
    for (double tk : switches) {
        starts.push_back(tk);
        if (tk - T > tol::kTimeEps) starts.push_back(tk - T);
    }
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end(),
                             [](double a, double b) { return std::abs(a - b) <= tol::kTimeEps; }),
                 starts.end());

    const double limit = sig.horizon() + tol::kTimeEps;
    rep.verdict = true;
    for (double t : starts) {
        if (t + T > limit) continue;
        WindowCheck w;
        w.start = t;
        w.end = t + T;
        w.active = sig.indices_active_in(t, t + T);
        const auto qs = quasi_strong_connectivity(sig.union_over(t, t + T));
        w.connected = qs.connected;
        w.centers = qs.centers;
        rep.verdict = rep.verdict && w.connected;
        rep.windows.push_back(std::move(w));
    }
    if (rep.windows.empty()) rep.verdict = false;
    return rep;
}

inline bool verify_ujqsc(const SwitchingSignal& sig, double T) { return ujqsc_report(sig, T).verdict; }

/// Step-indexed topology: either a repeating cycle or an explicit per-step list.
class DiscreteSwitchingSignal {
public:
    enum class Mode { Periodic, Explicit };

    DiscreteSwitchingSignal(std::vector<DirectedGraph> graphs, std::vector<int> sequence, Mode mode = Mode::Periodic)
        : graphs_(std::move(graphs)), seq_(std::move(sequence)), mode_(mode) {
        require(!graphs_.empty(), "DiscreteSwitchingSignal: no graphs");
        require(!seq_.empty(), "DiscreteSwitchingSignal: empty index sequence");
        const int n = graphs_.front().size();
        for (const auto& g : graphs_) require(g.size() == n, "DiscreteSwitchingSignal: graphs have different node counts");
        for (int k : seq_)
            require(k >= 0 && k < static_cast<int>(graphs_.size()), "DiscreteSwitchingSignal: graph index out of range");
    }

    static DiscreteSwitchingSignal constant(DirectedGraph g) { return DiscreteSwitchingSignal({std::move(g)}, {0}); }

    const std::vector<DirectedGraph>& graphs() const { return graphs_; }
    const std::vector<int>& sequence() const { return seq_; }
    Mode mode() const { return mode_; }
    int node_count() const { return graphs_.front().size(); }

    int index_at(long long k) const {
        require(k >= 0, "DiscreteSwitchingSignal: negative step");
        if (mode_ == Mode::Periodic) return seq_[static_cast<std::size_t>(k) % seq_.size()];
        require(k < static_cast<long long>(seq_.size()), "DiscreteSwitchingSignal: step beyond explicit sequence");
        return seq_[static_cast<std::size_t>(k)];
    }

    const DirectedGraph& graph_at(long long k) const { return graphs_[static_cast<std::size_t>(index_at(k))]; }

private:
    std::vector<DirectedGraph> graphs_;
    std::vector<int> seq_;
    Mode mode_;
};

/// Every window of steps {k, ..., k+M} with k + M < horizon has a quasi-strongly
/// connected union.
inline bool discrete_verify_ujqsc(const DiscreteSwitchingSignal& sig, long long M, long long horizon) {
    require(M >= 0, "discrete_verify_ujqsc: M must be non-negative");
    if (M + 1 > horizon) return false;
    for (long long k = 0; k + M < horizon; ++k) {
        std::vector<DirectedGraph> gs;
        for (long long j = k; j <= k + M; ++j) gs.push_back(sig.graph_at(j));
        if (!is_quasi_strongly_connected(graph_union(gs))) return false;
    }
    return true;
}

}  // namespace hiord

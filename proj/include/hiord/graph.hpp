#pragma once

// Weighted digraphs over a fixed node set.
//
// Edge (receiver i, sender j, w) means agent i receives information from
// agent j with weight w. Node indices are zero-based in the API; the text
// formats used by the CLI are one-based.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "lti_tools.hpp"
#include "tolerances.hpp"

namespace hiord {

struct Edge {
    int receiver = 0;
    int sender = 0;
    double weight = 1.0;
};

struct Neighbor {
    int sender = 0;
    double weight = 1.0;
};

class DirectedGraph {
public:
    DirectedGraph() = default;

    DirectedGraph(int n_nodes, std::span<const Edge> edges) : n_(n_nodes), in_(static_cast<std::size_t>(n_nodes)) {
        require(n_nodes >= 1, "DirectedGraph: node count must be positive");
        for (const auto& e : edges) {
            require(e.receiver >= 0 && e.receiver < n_ && e.sender >= 0 && e.sender < n_,
                    "DirectedGraph: edge endpoint out of range");
            require(e.receiver != e.sender, "DirectedGraph: self-edges are not allowed");
            require(e.weight > 0.0 && std::isfinite(e.weight), "DirectedGraph: edge weights must be positive");
            auto& row = in_[static_cast<std::size_t>(e.receiver)];
            require(std::none_of(row.begin(), row.end(), [&](const Neighbor& nb) { return nb.sender == e.sender; }),
                    "DirectedGraph: duplicate edge " + std::to_string(e.receiver + 1) + " <- " +
                        std::to_string(e.sender + 1));
            row.push_back({e.sender, e.weight});
        }
        for (auto& row : in_)
            std::sort(row.begin(), row.end(), [](const Neighbor& a, const Neighbor& b) { return a.sender < b.sender; });
    }

    DirectedGraph(int n_nodes, std::initializer_list<Edge> edges)
        : DirectedGraph(n_nodes, std::span<const Edge>(edges.begin(), edges.size())) {}

    static DirectedGraph empty(int n_nodes) { return DirectedGraph(n_nodes, std::span<const Edge>{}); }

    int size() const { return n_; }

    /// Senders agent i listens to, sorted by sender index.
    std::span<const Neighbor> neighbors(int i) const { return in_.at(static_cast<std::size_t>(i)); }

    double in_degree(int i) const {
        double d = 0.0;
        for (const auto& nb : neighbors(i)) d += nb.weight;
        return d;
    }

    std::optional<double> weight(int receiver, int sender) const {
        for (const auto& nb : neighbors(receiver))
            if (nb.sender == sender) return nb.weight;
        return std::nullopt;
    }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (int i = 0; i < n_; ++i)
            for (const auto& nb : neighbors(i)) out.push_back({i, nb.sender, nb.weight});
        return out;
    }

    std::size_t edge_count() const {
        std::size_t c = 0;
        for (const auto& row : in_) c += row.size();
        return c;
    }

    friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
        if (a.n_ != b.n_) return false;
        for (int i = 0; i < a.n_; ++i) {
            auto ra = a.neighbors(i);
            auto rb = b.neighbors(i);
            if (ra.size() != rb.size()) return false;
            for (std::size_t k = 0; k < ra.size(); ++k)
                if (ra[k].sender != rb[k].sender || std::abs(ra[k].weight - rb[k].weight) > tol::kGraphWeight)
                    return false;
        }
        return true;
    }

private:
    int n_ = 0;
    std::vector<std::vector<Neighbor>> in_;
};

inline Matrix laplacian(const DirectedGraph& g) {
    const int n = g.size();
    Matrix L = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (const auto& nb : g.neighbors(i)) {
            L(i, nb.sender) -= nb.weight;
            L(i, i) += nb.weight;
        }
    return L;
}

/// Edge-set union; a pair present in several graphs keeps its maximum weight.
inline DirectedGraph graph_union(std::span<const DirectedGraph> gs) {
    require(!gs.empty(), "graph_union: empty list");
    const int n = gs.front().size();
    Matrix w = Matrix::Zero(n, n);
    for (const auto& g : gs) {
        require(g.size() == n, "graph_union: graphs have different node counts");
        for (int i = 0; i < n; ++i)
            for (const auto& nb : g.neighbors(i)) w(i, nb.sender) = std::max(w(i, nb.sender), nb.weight);
    }
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (w(i, j) > 0.0) edges.push_back({i, j, w(i, j)});
    return DirectedGraph(n, edges);
}

inline DirectedGraph graph_union(const DirectedGraph& a, const DirectedGraph& b) {
    const DirectedGraph both[] = {a, b};
    return graph_union(both);
}

/// Nodes reachable from `source` along information flow (sender -> receiver).
inline std::vector<bool> reachable_from(const DirectedGraph& g, int source) {
    const int n = g.size();
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (const auto& nb : g.neighbors(i)) out[static_cast<std::size_t>(nb.sender)].push_back(i);
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::vector<int> stack{source};
    seen[static_cast<std::size_t>(source)] = true;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : out[static_cast<std::size_t>(v)])
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = true;
                stack.push_back(w);
            }
    }
    return seen;
}

struct QuasiStrongResult {
    bool connected = false;
    std::vector<int> centers;  // zero-based
};

inline QuasiStrongResult quasi_strong_connectivity(const DirectedGraph& g) {
    QuasiStrongResult r;
    for (int v = 0; v < g.size(); ++v) {
        const auto seen = reachable_from(g, v);
        if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) r.centers.push_back(v);
    }
    r.connected = !r.centers.empty();
    return r;
}

inline bool is_quasi_strongly_connected(const DirectedGraph& g) { return quasi_strong_connectivity(g).connected; }

inline bool is_strongly_connected(const DirectedGraph& g) {
    return static_cast<int>(quasi_strong_connectivity(g).centers.size()) == g.size();
}

/// Column sums of the Laplacian vanish (in-weight equals out-weight per node).
inline bool is_balanced(const DirectedGraph& g) {
    const Matrix L = laplacian(g);
    return L.colwise().sum().cwiseAbs().maxCoeff() <= tol::kGraphWeight * std::max(1.0, L.cwiseAbs().maxCoeff());
}

}  // namespace hiord

#include <catch_amalgamated.hpp>

#include <random>
#include <set>
#include <utility>
#include <vector>

#include "hiord/graph.hpp"
#include "hiord/scenarios.hpp"

using namespace hiord;

namespace {

// Warshall closure on the information-flow relation sender -> receiver.
std::vector<std::vector<bool>> closure(const DirectedGraph& g) {
    const int n = g.size();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (int v = 0; v < n; ++v) r[v][v] = true;
    for (const auto& e : g.edges()) r[e.sender][e.receiver] = true;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = true;
    return r;
}

std::vector<int> oracle_centers(const DirectedGraph& g) {
    const auto r = closure(g);
    std::vector<int> c;
    for (int v = 0; v < g.size(); ++v) {
        bool all = true;
        for (int w = 0; w < g.size(); ++w) all = all && r[v][w];
        if (all) c.push_back(v);
    }
    return c;
}

DirectedGraph random_graph(std::mt19937_64& rng, int n, double density) {
    std::bernoulli_distribution keep(density);
    std::uniform_real_distribution<double> w(0.1, 2.0);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && keep(rng)) edges.push_back({i, j, w(rng)});
    return DirectedGraph(n, edges);
}

std::set<std::pair<int, int>> flow_pairs(const DirectedGraph& g) {
    std::set<std::pair<int, int>> s;
    for (const auto& e : g.edges()) s.insert({e.sender + 1, e.receiver + 1});
    return s;
}

}  // namespace

TEST_CASE("laplacian of the first example graph") {
    const auto g1 = example1_graphs()[0];
    const Matrix L = laplacian(g1);
    Matrix expected = Matrix::Zero(5, 5);
    expected(1, 0) = -1;
    expected(1, 1) = 1;
    expected(3, 0) = -1;
    expected(3, 3) = 1;
    expected(4, 2) = -1;
    expected(4, 4) = 1;
    CHECK(L == expected);
}

TEST_CASE("laplacian of an empty graph is zero") {
    CHECK(laplacian(DirectedGraph::empty(3)) == Matrix::Zero(3, 3));
}

TEST_CASE("laplacian rows sum to zero and signs are right") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        const auto g = random_graph(rng, 6, 0.4);
        const Matrix L = laplacian(g);
        CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                if (i == j) CHECK(L(i, j) >= 0.0);
                else CHECK(L(i, j) <= 0.0);
            }
    }
}

TEST_CASE("union of the three example graphs has nine edges") {
    const auto gs = example1_graphs();
    const auto u = graph_union(gs);
    const std::set<std::pair<int, int>> expected{{1, 2}, {1, 4}, {3, 5}, {5, 1}, {3, 2},
                                                 {4, 2}, {2, 3}, {4, 3}, {5, 4}};
    CHECK(u.edge_count() == 9);
    CHECK(flow_pairs(u) == expected);
}

TEST_CASE("union is idempotent, additive on disjoint sets, commutative and associative") {
    const auto gs = example1_graphs();
    CHECK(graph_union(gs[0], gs[0]) == gs[0]);
    CHECK(graph_union(gs[0], gs[1]).edge_count() == gs[0].edge_count() + gs[1].edge_count());

    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const auto a = random_graph(rng, 5, 0.3);
        const auto b = random_graph(rng, 5, 0.3);
        const auto c = random_graph(rng, 5, 0.3);
        CHECK(graph_union(a, b) == graph_union(b, a));
        CHECK(graph_union(graph_union(a, b), c) == graph_union(a, graph_union(b, c)));
    }
}

TEST_CASE("union keeps the maximum weight") {
    const std::vector<Edge> e1{{1, 0, 0.5}};
    const std::vector<Edge> e2{{1, 0, 2.0}};
    const auto u = graph_union(DirectedGraph(2, e1), DirectedGraph(2, e2));
    REQUIRE(u.weight(1, 0).has_value());
    CHECK(*u.weight(1, 0) == 2.0);
}

TEST_CASE("union rejects mismatched node counts") {
    CHECK_THROWS_AS(graph_union(DirectedGraph::empty(2), DirectedGraph::empty(3)), Error);
}

TEST_CASE("quasi-strong connectivity on the example graphs") {
    const auto gs = example1_graphs();
    const auto r1 = quasi_strong_connectivity(gs[0]);
    CHECK_FALSE(r1.connected);
    CHECK(r1.centers.empty());

    const auto u = graph_union(gs);
    CHECK(is_quasi_strongly_connected(u));
    // every node lies on the cycle 1 -> 2 -> 3 -> 5 -> 1 or reaches it through 4
    CHECK(quasi_strong_connectivity(u).centers == oracle_centers(u));
    CHECK(is_strongly_connected(u));
}

TEST_CASE("single node is a center of itself") {
    const auto r = quasi_strong_connectivity(DirectedGraph::empty(1));
    CHECK(r.connected);
    CHECK(r.centers == std::vector<int>{0});
}

TEST_CASE("strong connectivity trivial cases") {
    const std::vector<Edge> cycle{{1, 0, 1}, {2, 1, 1}, {0, 2, 1}};
    CHECK(is_strongly_connected(DirectedGraph(3, cycle)));
    CHECK_FALSE(is_strongly_connected(DirectedGraph::empty(2)));
}

TEST_CASE("centers agree with a transitive-closure oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(1, 5);
    std::uniform_real_distribution<double> dens(0.0, 0.4);
    int mismatches = 0;
    for (int rep = 0; rep < 10000; ++rep) {
        const auto g = random_graph(rng, size(rng), dens(rng));
        const auto r = quasi_strong_connectivity(g);
        const auto c = oracle_centers(g);
        if (r.centers != c || r.connected != !c.empty()) ++mismatches;
        if (is_strongly_connected(g) && !r.connected) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("balanced graphs") {
    const std::vector<Edge> ring{{1, 0, 1}, {2, 1, 1}, {3, 2, 1}, {0, 3, 1}};
    CHECK(is_balanced(DirectedGraph(4, ring)));
    CHECK_FALSE(is_balanced(example1_graphs()[0]));
    CHECK(is_balanced(DirectedGraph::empty(3)));
}

TEST_CASE("graph construction rejects invalid edges") {
    const std::vector<Edge> self{{0, 0, 1}};
    const std::vector<Edge> out_of_range{{3, 0, 1}};
    const std::vector<Edge> nonpositive{{1, 0, 0.0}};
    CHECK_THROWS_AS(DirectedGraph(2, self), Error);
    CHECK_THROWS_AS(DirectedGraph(2, out_of_range), Error);
    CHECK_THROWS_AS(DirectedGraph(2, nonpositive), Error);
}

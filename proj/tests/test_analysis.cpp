#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "hiord/analysis.hpp"
#include "hiord/lti_tools.hpp"
#include "hiord/protocols.hpp"
#include "hiord/scenarios.hpp"

using namespace hiord;

namespace {

DirectedGraph random_graph(std::mt19937_64& rng, int n, double density) {
    std::bernoulli_distribution keep(density);
    std::uniform_real_distribution<double> w(0.1, 3.0);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && keep(rng)) edges.push_back({i, j, w(rng)});
    return DirectedGraph(n, edges);
}

Matrix random_stochastic(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::bernoulli_distribution sparse(0.3);
    Matrix P(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) P(i, j) = sparse(rng) ? 0.0 : U(rng);
        if (P.row(i).sum() == 0.0) P(i, i) = 1.0;
        P.row(i) /= P.row(i).sum();
    }
    return P;
}

// half the max L1 distance between rows, straight from the definition
double tau_oracle(const Matrix& P) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index j = 0; j < P.rows(); ++j) worst = std::max(worst, (P.row(i) - P.row(j)).cwiseAbs().sum());
    return 0.5 * worst;
}

SwitchingSignal example1_signal(double horizon) {
    return SwitchingSignal(example1_graphs(), PeriodicSchedule{0.1, {0, 1, 2}}, horizon);
}

}  // namespace

TEST_CASE("stochastic matrix checks") {
    CHECK(is_stochastic(Matrix::Identity(3, 3)));
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 0) = 1.1;
    bad(0, 1) = -0.1;
    CHECK_FALSE(is_stochastic(bad));
    CHECK_FALSE(is_stochastic(Matrix::Constant(2, 2, 0.6)));
}

TEST_CASE("exp(-L dt) is stochastic") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> size(1, 6);
    int failures = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const auto g = random_graph(rng, size(rng), 0.4);
        for (double d : {0.01, 0.1, 1.0})
            if (!is_stochastic(mat_exp(-laplacian(g), d), 1e-9)) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("ergodicity coefficient values") {
    CHECK(ergodicity_coefficient(Matrix::Identity(3, 3)) == 1.0);
    const RowVector c = (RowVector(3) << 0.2, 0.5, 0.3).finished();
    CHECK(ergodicity_coefficient(Matrix::Ones(3, 1) * c) == Catch::Approx(0.0).margin(1e-15));
    Matrix P(2, 2);
    P << 0.5, 0.5, 0.25, 0.75;
    CHECK(ergodicity_coefficient(P) == Catch::Approx(0.25));
    CHECK_THROWS_AS(ergodicity_coefficient(Matrix::Constant(2, 2, 0.7)), Error);
}

TEST_CASE("ergodicity coefficient matches its definition") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 200; ++rep) {
        const Matrix P = random_stochastic(rng, 2 + rep % 5);
        CHECK(ergodicity_coefficient(P) == Catch::Approx(tau_oracle(P)).margin(1e-14));
    }
}

TEST_CASE("disagreement contracts by the ergodicity coefficient") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0.0, 2.0);
    int violations = 0;
    for (int rep = 0; rep < 10000; ++rep) {
        const int n = 2 + rep % 6;
        const Matrix P = random_stochastic(rng, n);
        Vector r(n);
        for (int k = 0; k < n; ++k) r(k) = N(rng);
        if (disagreement(P * r) > ergodicity_coefficient(P) * disagreement(r) + 1e-12) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("ergodicity coefficient is submultiplicative") {
    std::mt19937_64 rng(4);
    int violations = 0;
    for (int rep = 0; rep < 2000; ++rep) {
        const int n = 2 + rep % 5;
        const Matrix P = random_stochastic(rng, n), Q = random_stochastic(rng, n);
        if (ergodicity_coefficient(P * Q) > ergodicity_coefficient(P) * ergodicity_coefficient(Q) + 1e-12) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("discrete transition products") {
    const DiscreteSwitchingSignal sig(ring_split_graphs(4), {0, 1, 2, 3});
    CHECK(discrete_transition(sig, 5, 5) == Matrix::Identity(4, 4));
    CHECK(discrete_transition(sig, 6, 7) == Matrix::Identity(4, 4) - s_matrix(sig.graph_at(6)));
    CHECK_THROWS_AS(discrete_transition(sig, 7, 6), Error);

    const Matrix Phi = discrete_transition(sig, 0, 37);
    CHECK(is_stochastic(Phi, 1e-12));
    CHECK(Phi.diagonal().minCoeff() > 0.0);
}

TEST_CASE("discrete transitions contract geometrically on the ring") {
    const DiscreteSwitchingSignal sig(ring_split_graphs(4), {0, 1, 2, 3});
    // window of M + 1 = 4 steps; fit log tau against the number of windows
    std::vector<double> logs;
    for (int h = 1; h <= 12; ++h) logs.push_back(std::log(ergodicity_coefficient(discrete_transition(sig, 0, 4 * h))));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(logs.size());
    for (std::size_t k = 0; k < logs.size(); ++k) {
        const double x = double(k + 1);
        sx += x;
        sy += logs[k];
        sxx += x * x;
        sxy += x * logs[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double rate = std::exp(slope);
    INFO("fitted rate per window " << rate);
    CHECK(rate < 1.0);
    CHECK(rate > 0.0);
    // each window contracts, so the product is bounded by the window coefficients
    double bound = 1.0;
    for (int h = 0; h < 6; ++h) bound *= ergodicity_coefficient(discrete_transition(sig, 4 * h, 4 * h + 4));
    CHECK(ergodicity_coefficient(discrete_transition(sig, 0, 24)) <= bound + 1e-12);
}

TEST_CASE("continuous transition products") {
    const auto sig = example1_signal(10.0);
    CHECK((continuous_transition(sig, 0.37, 0.37) - Matrix::Identity(5, 5)).norm() == 0.0);
    const Matrix single = continuous_transition(sig, 0.18, 0.12);
    CHECK((single - mat_exp(-laplacian(sig.graph_at(0.15)), 0.06)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(continuous_transition(sig, 0.1, 0.2), Error);

    // latest segment on the left
    const Matrix two = continuous_transition(sig, 0.15, 0.05);
    const Matrix manual = mat_exp(-laplacian(sig.graph_at(0.12)), 0.05) * mat_exp(-laplacian(sig.graph_at(0.07)), 0.05);
    CHECK((two - manual).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("continuous transitions compose and stay stochastic") {
    const auto sig = example1_signal(10.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 10.0);
    for (int rep = 0; rep < 50; ++rep) {
        double r = U(rng), s = U(rng), t = U(rng);
        if (r > s) std::swap(r, s);
        if (s > t) std::swap(s, t);
        if (r > s) std::swap(r, s);
        const Matrix Pts = continuous_transition(sig, t, s);
        const Matrix Psr = continuous_transition(sig, s, r);
        const Matrix Ptr = continuous_transition(sig, t, r);
        CHECK(is_stochastic(Ptr, 1e-9));
        CHECK((Ptr - Pts * Psr).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(Ptr.norm() <= 5.0);
    }
}

TEST_CASE("continuous transitions over long windows mix") {
    const auto sig = example1_signal(60.0);
    const double tau_long = ergodicity_coefficient(continuous_transition(sig, 3.0, 0.0));
    CHECK(tau_long < 1.0);
    const double tau_longer = ergodicity_coefficient(continuous_transition(sig, 6.0, 0.0));
    CHECK(tau_longer <= tau_long);

    // Phi(t, 0) settles to rank one: successive products stop changing
    const Matrix P40 = continuous_transition(sig, 40.0, 0.0);
    const Matrix P60 = continuous_transition(sig, 60.0, 0.0);
    CHECK((P60 - P40).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(ergodicity_coefficient(P60) < 1e-6);
}

#pragma once

// The consensus control laws, their observers, and the order-reduction map.
//
// Agent states are passed stacked: X = (x_1^T, ..., x_N^T)^T with x_i of
// length m, the Kronecker layout used by the closed-loop matrices.

#include "error.hpp"
#include "gains.hpp"
#include "graph.hpp"
#include "lti_tools.hpp"

namespace hiord {

inline auto agent_block(const Vector& stacked, int i, int m) { return stacked.segment(static_cast<Eigen::Index>(i) * m, m); }

namespace detail {

inline void check_agent(const Vector& stacked, int i, int m, const DirectedGraph& g) {
    require(m >= 1 && stacked.size() == static_cast<Eigen::Index>(g.size()) * m, "protocol: stacked state dimension mismatch");
    require(i >= 0 && i < g.size(), "protocol: agent index out of range");
}

/// sum_j alpha_ij * K (v_i - v_j) over the in-neighbors of i.
inline double coupling(int i, const Vector& stacked, const DirectedGraph& g, int m, const RowVector& K) {
    double acc = 0.0;
    const auto vi = agent_block(stacked, i, m);
    for (const auto& nb : g.neighbors(i)) acc += nb.weight * K.dot(vi - agent_block(stacked, nb.sender, m));
    return acc;
}

}  // namespace detail

/// u_i = K1 x_i - sum_j alpha_ij K2 (x_i - x_j)
inline double u_state_feedback(int i, const Vector& X, const DirectedGraph& g, const ContinuousGainSet& gains) {
    detail::check_agent(X, i, gains.m, g);
    return gains.K1.dot(agent_block(X, i, gains.m)) - detail::coupling(i, X, g, gains.m, gains.K2);
}

/// I_N (x) (A + B K1) - L (x) (B K2), dense; used for cross-validation and transition matrices.
inline Matrix closed_loop_matrix(const DirectedGraph& g, const ContinuousGainSet& gains) {
    const auto chain = integrator_chain(gains.m);
    const Matrix local = chain.A + chain.B * gains.K1;
    const Matrix coupling = chain.B * gains.K2;
    const Matrix L = laplacian(g);
    const int n = g.size();
    const int m = gains.m;
    Matrix M = Matrix::Zero(n * m, n * m);
    for (int i = 0; i < n; ++i) {
        M.block(i * m, i * m, m, m) += local;
        for (int j = 0; j < n; ++j)
            if (L(i, j) != 0.0) M.block(i * m, j * m, m, m) -= L(i, j) * coupling;
    }
    return M;
}

/// State-feedback law evaluated on observer estimates; requires K3 in the gain set.
inline double u_output_feedback(int i, const Vector& S, const DirectedGraph& g, const ContinuousGainSet& gains) {
    require(gains.K3.has_value(), "u_output_feedback: gain set has no observer gain K3");
    return u_state_feedback(i, S, g, gains);
}

/// ds_i/dt = (A + K3 C) s_i + B u_i - K3 y_i
inline Vector observer_rhs(const Vector& s_i, double u_i, double y_i, const LTISystem& plant, const Vector& K3) {
    require(s_i.size() == plant.order() && K3.size() == plant.order(), "observer_rhs: dimension mismatch");
    return plant.A * s_i + K3 * (plant.C.dot(s_i) - y_i) + plant.B * u_i;
}

/**
 * General LTI law: u_i = -a^T sbar_i + K1 sbar_i - sum_j alpha_ij K2 (sbar_i - sbar_j)
 * with sbar = T s the estimate expressed in canonical coordinates.
 */
inline double u_general_lti(int i, const Vector& S, const DirectedGraph& g, const ContinuousGainSet& gains,
                            const CanonicalForm& canon) {
    const int m = gains.m;
    detail::check_agent(S, i, m, g);
    require(canon.T.rows() == m && canon.a.size() == m, "u_general_lti: canonical form dimension mismatch");
    const RowVector local = (gains.K1 - canon.a.transpose()) * canon.T;
    const RowVector coupled = gains.K2 * canon.T;
    return local.dot(agent_block(S, i, m)) - detail::coupling(i, S, g, m, coupled);
}

/// Row-normalised coupling matrix: S_ii = d_i / (1 + d_i), S_ij = -alpha_ij / (1 + d_i).
inline Matrix s_matrix(const DirectedGraph& g) {
    const int n = g.size();
    Matrix S = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double d = g.in_degree(i);
        for (const auto& nb : g.neighbors(i)) S(i, nb.sender) = -nb.weight / (1.0 + d);
        S(i, i) = d / (1.0 + d);
    }
    return S;
}

/// u_i[k] = K4 z_i - (1 / (1 + d_i)) sum_j alpha_ij K5 (z_i - z_j)
inline double u_discrete(int i, const Vector& Z, const DirectedGraph& g, const DiscreteGainSet& gains) {
    detail::check_agent(Z, i, gains.m, g);
    const double d = g.in_degree(i);
    return gains.K4.dot(agent_block(Z, i, gains.m)) - detail::coupling(i, Z, g, gains.m, gains.K5) / (1.0 + d);
}

/// z_i[k+1] = (A + K6 C) z_i + B u_i - K6 y_i
inline Vector discrete_observer_step(const Vector& z_i, double u_i, double y_i, const LTISystem& plant, const Vector& K6) {
    require(z_i.size() == plant.order() && K6.size() == plant.order(), "discrete_observer_step: dimension mismatch");
    return plant.A * z_i + K6 * (plant.C.dot(z_i) - y_i) + plant.B * u_i;
}

/// xbar_i = K x_i for every agent.
inline Vector reduce(const Vector& stacked, const RowVector& K) {
    const auto m = K.size();
    require(m >= 1 && stacked.size() % m == 0, "reduce: stacked dimension is not a multiple of the gain length");
    const auto n = stacked.size() / m;
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = K.dot(stacked.segment(i * m, m));
    return out;
}

}  // namespace hiord

#pragma once

// Stochastic-matrix machinery behind the convergence arguments: stochasticity
// checks, the ergodicity coefficient and the transition-matrix products of the
// reduced first-order dynamics.

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "lti_tools.hpp"
#include "protocols.hpp"
#include "switching.hpp"
#include "tolerances.hpp"

namespace hiord {

inline bool is_stochastic(const Matrix& P, double tolerance = tol::kStochastic) {
    require(P.rows() == P.cols(), "is_stochastic: matrix must be square");
    if (P.size() == 0) return true;
    if (P.minCoeff() < -tolerance) return false;
    return (P.rowwise().sum().array() - 1.0).abs().maxCoeff() <= tolerance;
}

/// Clips entries above -kStochastic at zero and renormalises rows; throws if P is
/// not stochastic within kStochastic.
inline Matrix clean_stochastic(const Matrix& P) {
    require(is_stochastic(P, tol::kStochastic), "stochastic matrix expected");
    Matrix Q = P.cwiseMax(0.0);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) Q.row(i) /= Q.row(i).sum();
    return Q;
}

/// tau(P) = 0.5 max_{i,j} sum_s |P_is - P_js|
inline double ergodicity_coefficient(const Matrix& P) {
    const Matrix Q = clean_stochastic(P);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
        for (Eigen::Index j = i + 1; j < Q.rows(); ++j) worst = std::max(worst, (Q.row(i) - Q.row(j)).cwiseAbs().sum());
    return std::clamp(0.5 * worst, 0.0, 1.0);
}

/// Phi_d(j, i) = (I - S[j-1]) ... (I - S[i]); identity when j == i.
inline Matrix discrete_transition(const DiscreteSwitchingSignal& sig, long long i, long long j) {
    require(i <= j, "discrete_transition: i > j");
    const int n = sig.node_count();
    Matrix Phi = Matrix::Identity(n, n);
    for (long long k = i; k < j; ++k) Phi = (Matrix::Identity(n, n) - s_matrix(sig.graph_at(k))) * Phi;
    return Phi;
}

/// Ordered product of exp(-L_k * segment length) over the switch segments in [s, t].
inline Matrix continuous_transition(const SwitchingSignal& sig, double t, double s) {
    require(s <= t, "continuous_transition: s > t");
    const int n = sig.node_count();
    Matrix Phi = Matrix::Identity(n, n);
    double from = s;
    while (from < t) {
        const int seg = sig.segment_at(from + tol::kTimeEps * std::max(1.0, std::abs(from)));
        const double to = std::min(sig.segment_end(seg), t);
        const Matrix L = laplacian(sig.graphs()[static_cast<std::size_t>(sig.segment_graph(seg))]);
        Phi = mat_exp(-L, to - from) * Phi;
        from = to;
    }
    return Phi;
}

}  // namespace hiord

#pragma once

// Protocol gain vectors and the polynomial stability tests that certify them.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"
#include "lti_tools.hpp"
#include "tolerances.hpp"

namespace hiord {

/// m-th order integrator chain: ones on the superdiagonal, B = e_m, C = e_1^T.
inline LTISystem integrator_chain(int m) {
    require(m >= 1, "integrator_chain: order must be positive");
    LTISystem sys;
    sys.A = Matrix::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) sys.A(i, i + 1) = 1.0;
    sys.B = Vector::Zero(m);
    sys.B(m - 1) = 1.0;
    sys.C = RowVector::Zero(m);
    sys.C(0) = 1.0;
    return sys;
}

/**
 * Continuous-time gains built from a = (a_1, ..., a_{m-1}).
 *
 * K1 = (0, -a_1, ..., -a_{m-1}) and K2 = (a_1, ..., a_{m-1}, 1), so that
 * K2 (A + B K1) = 0 and K2 B = 1 for the integrator chain. K3 is the optional
 * observer gain (m x 1).
 */
struct ContinuousGainSet {
    int m = 0;
    std::vector<double> a;
    RowVector K1;
    RowVector K2;
    std::optional<Vector> K3;

    /// s^{m-1} + a_{m-1} s^{m-2} + ... + a_1
    Polynomial characteristic() const { return Polynomial(a); }
};

/// Discrete-time gains from b: K4 = (b_1, b_2 - b_1, ..., 1 - b_{m-1}), K5 = (b_1, ..., b_{m-1}, 1).
struct DiscreteGainSet {
    int m = 0;
    std::vector<double> b;
    RowVector K4;
    RowVector K5;
    std::optional<Vector> K6;

    Polynomial characteristic() const { return Polynomial(b); }
};

inline ContinuousGainSet make_continuous_gains(std::span<const double> a, std::optional<Vector> K3 = std::nullopt) {
    require(!a.empty(), "make_continuous_gains: coefficient vector must be non-empty");
    ContinuousGainSet g;
    g.m = static_cast<int>(a.size()) + 1;
    g.a.assign(a.begin(), a.end());
    g.K1 = RowVector::Zero(g.m);
    g.K2 = RowVector::Ones(g.m);
    for (int k = 0; k + 1 < g.m; ++k) {
        g.K1(k + 1) = -a[static_cast<std::size_t>(k)];
        g.K2(k) = a[static_cast<std::size_t>(k)];
    }
    if (K3) require(K3->size() == g.m, "make_continuous_gains: K3 dimension mismatch");
    g.K3 = std::move(K3);
    return g;
}

inline DiscreteGainSet make_discrete_gains(std::span<const double> b, std::optional<Vector> K6 = std::nullopt) {
    require(!b.empty(), "make_discrete_gains: coefficient vector must be non-empty");
    DiscreteGainSet g;
    g.m = static_cast<int>(b.size()) + 1;
    g.b.assign(b.begin(), b.end());
    g.K4 = RowVector::Zero(g.m);
    g.K5 = RowVector::Ones(g.m);
    double prev = 0.0;
    for (int k = 0; k + 1 < g.m; ++k) {
        const double bk = b[static_cast<std::size_t>(k)];
        g.K4(k) = bk - prev;
        g.K5(k) = bk;
        prev = bk;
    }
    g.K4(g.m - 1) = 1.0 - prev;
    if (K6) require(K6->size() == g.m, "make_discrete_gains: K6 dimension mismatch");
    g.K6 = std::move(K6);
    return g;
}

/// Coefficients of (s + 1)^{m-1}: the continuous default.
inline std::vector<double> default_continuous_coefficients(int m) {
    const auto p = Polynomial::power_of_linear(1.0, m - 1);
    return {p.coefficients().begin(), p.coefficients().end()};
}

/// Coefficients of (s + 1/2)^{m-1}: the discrete default.
inline std::vector<double> default_discrete_coefficients(int m) {
    const auto p = Polynomial::power_of_linear(0.5, m - 1);
    return {p.coefficients().begin(), p.coefficients().end()};
}

/// Default observer polynomials: (s + 2)^m continuous, (s + 1/4)^m discrete.
inline Polynomial default_observer_polynomial(int m, bool discrete) {
    return Polynomial::power_of_linear(discrete ? 0.25 : 2.0, m);
}

/// Routh-Hurwitz: strict open-left-half-plane test. A zero pivot means a root
/// on or across the imaginary axis and yields false.
inline bool is_hurwitz(const Polynomial& p) {
    const int n = p.degree();
    require(n >= 1, "is_hurwitz: degree must be at least 1");
    for (int k = 0; k < n; ++k)
        if (!(p.coefficient(k) > 0.0)) return false;

    // row r holds coefficients of s^{n-r}, s^{n-r-2}, ...
    const auto width = static_cast<std::size_t>(n / 2 + 1);
    std::vector<double> upper(width, 0.0), lower(width, 0.0);
    for (std::size_t j = 0; j < width; ++j) {
        const int hi = n - 2 * static_cast<int>(j);
        const int lo = n - 1 - 2 * static_cast<int>(j);
        if (hi >= 0) upper[j] = p.coefficient(hi);
        if (lo >= 0) lower[j] = p.coefficient(lo);
    }
    for (int row = 1; row <= n; ++row) {
        if (!(lower[0] > 0.0)) return false;
        std::vector<double> next(width, 0.0);
        for (std::size_t j = 0; j + 1 < width; ++j)
            next[j] = (lower[0] * upper[j + 1] - upper[0] * lower[j + 1]) / lower[0];
        upper = std::move(lower);
        lower = std::move(next);
    }
    return true;
}

/// Jury (Schur-Cohn) reduction: strict open-unit-disc test; |a_0| == |a_n|
/// at any stage means a boundary root and yields false.
inline bool is_schur(const Polynomial& p) {
    const int n = p.degree();
    require(n >= 1, "is_schur: degree must be at least 1");
    std::vector<double> c(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) c[static_cast<std::size_t>(k)] = p.coefficient(k);
    while (c.size() > 1) {
        const double lead = c.back();
        const double tail = c.front();
        if (!(std::abs(tail) < std::abs(lead))) return false;
        const std::size_t d = c.size() - 1;
        std::vector<double> next(d);
        // (lead * p(z) - tail * p*(z)) / z, with p*(z) the reversed polynomial
        for (std::size_t k = 1; k <= d; ++k) next[k - 1] = lead * c[k] - tail * c[d - k];
        c = std::move(next);
    }
    return true;
}

struct ObserverGain {
    Vector K;
    double residual = 0.0;    // max coefficient error of char_poly(A + K C) vs desired
    double condition = 1.0;   // condition number of the observability matrix
    bool ill_conditioned = false;
};

/// Ackermann's formula on the dual pair: K = -desired(A) * O^{-1} * e_m.
inline ObserverGain place_observer_gain(const Matrix& A, const RowVector& C, const Polynomial& desired) {
    require(A.rows() == A.cols() && C.size() == A.rows(), "place_observer_gain: dimension mismatch");
    const auto m = A.rows();
    require(desired.degree() == m, "place_observer_gain: desired polynomial must have degree m");
    const Matrix O = observability_matrix(A, C);
    require(numerical_rank(O) == m, "place_observer_gain: (A, C) is not observable");

    Eigen::JacobiSVD<Matrix> svd(O);
    const auto& sv = svd.singularValues();
    ObserverGain out;
    out.condition = sv(0) / sv(sv.size() - 1);
    out.ill_conditioned = out.condition > tol::kIllConditioned;

    Vector em = Vector::Zero(m);
    em(m - 1) = 1.0;
    out.K = -desired.evaluate(A) * O.partialPivLu().solve(em);

    const Polynomial achieved = char_poly(A + out.K * C);
    for (int k = 0; k < desired.degree(); ++k)
        out.residual = std::max(out.residual, std::abs(achieved.coefficient(k) - desired.coefficient(k)));
    return out;
}

}  // namespace hiord

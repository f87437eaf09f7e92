#pragma once

// Small dense linear-systems toolkit: matrix exponential, characteristic
// polynomials, polynomial roots, controllability/observability tests and the
// single-input controllable canonical transformation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "error.hpp"
#include "tolerances.hpp"

namespace hiord {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Complex = std::complex<double>;

/**
 * Monic polynomial s^d + c_{d-1} s^{d-1} + ... + c_0.
 *
 * Only the lower coefficients are stored; the leading one is implicit. This
 * matches how the protocol gains are parameterised: the coefficient vector
 * (a_1, ..., a_{m-1}) of a gain set is exactly (c_0, ..., c_{m-2}).
 */
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> lower) : c_(std::move(lower)) {}

    /// (s + shift)^degree.
    static Polynomial power_of_linear(double shift, int degree) {
        require(degree >= 0, "Polynomial: negative degree");
        // full coefficient vector, low to high
        std::vector<double> full{1.0};
        for (int d = 0; d < degree; ++d) {
            std::vector<double> next(full.size() + 1, 0.0);
            for (std::size_t k = 0; k < full.size(); ++k) {
                next[k] += shift * full[k];
                next[k + 1] += full[k];
            }
            full = std::move(next);
        }
        full.pop_back();
        return Polynomial(std::move(full));
    }

    /// Monic polynomial with the given real roots.
    static Polynomial from_real_roots(std::span<const double> roots) {
        std::vector<double> full{1.0};
        for (double r : roots) {
            std::vector<double> next(full.size() + 1, 0.0);
            for (std::size_t k = 0; k < full.size(); ++k) {
                next[k] -= r * full[k];
                next[k + 1] += full[k];
            }
            full = std::move(next);
        }
        full.pop_back();
        return Polynomial(std::move(full));
    }

    int degree() const { return static_cast<int>(c_.size()); }
    std::span<const double> coefficients() const { return c_; }

    /// Coefficient of s^k, with the implicit leading 1 at k == degree().
    double coefficient(int k) const {
        if (k == degree()) return 1.0;
        require(k >= 0 && k < degree(), "Polynomial: coefficient index out of range");
        return c_[static_cast<std::size_t>(k)];
    }

    Complex operator()(Complex s) const {
        Complex acc{1.0, 0.0};
        for (int k = degree() - 1; k >= 0; --k) acc = acc * s + c_[static_cast<std::size_t>(k)];
        return acc;
    }

    /// p(M) by Horner's rule.
    Matrix evaluate(const Matrix& M) const {
        require(M.rows() == M.cols(), "Polynomial::evaluate: matrix must be square");
        const auto I = Matrix::Identity(M.rows(), M.cols());
        Matrix acc = I;
        for (int k = degree() - 1; k >= 0; --k) acc = acc * M + c_[static_cast<std::size_t>(k)] * I;
        return acc;
    }

    /// Companion matrix with ones on the superdiagonal and -c in the last row.
    Matrix companion() const {
        const int d = degree();
        Matrix C = Matrix::Zero(d, d);
        for (int i = 0; i + 1 < d; ++i) C(i, i + 1) = 1.0;
        for (int k = 0; k < d; ++k) C(d - 1, k) = -c_[static_cast<std::size_t>(k)];
        return C;
    }

private:
    std::vector<double> c_;
};

struct LTISystem {
    Matrix A;
    Vector B;
    RowVector C;

    int order() const { return static_cast<int>(A.rows()); }

    void validate() const {
        require(A.rows() == A.cols() && A.rows() > 0, "LTISystem: A must be square and non-empty");
        require(B.size() == A.rows(), "LTISystem: B dimension mismatch");
        require(C.size() == A.rows(), "LTISystem: C dimension mismatch");
    }
};

/**
 * Transformation into controllable canonical form.
 *
 * T * A * T^{-1} has ones on the superdiagonal and `a` in its last row;
 * T * B = e_m. The last row keeps the sign it has in the transformed matrix,
 * so the open-loop characteristic polynomial is s^m - a_m s^{m-1} - ... - a_1.
 */
struct CanonicalForm {
    Matrix T;
    Matrix T_inv;
    Vector a;
};

/// exp(M t) by scaling and squaring with the degree-13 diagonal Padé approximant.
inline Matrix mat_exp(const Matrix& M, double t = 1.0) {
    require(M.rows() == M.cols(), "mat_exp: matrix must be square");
    const auto n = M.rows();
    if (n == 0) return Matrix(0, 0);
    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    Matrix A = M * t;
    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
    if (s > 0) A /= std::ldexp(1.0, s);

    const Matrix I = Matrix::Identity(n, n);
    const Matrix A2 = A * A;
    const Matrix A4 = A2 * A2;
    const Matrix A6 = A4 * A2;
    // normalised by b[0] so that V = I exactly when A = 0
    const Matrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I) / b[0];
    const Matrix V = (A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2) / b[0] + I;
    Matrix R = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < s; ++k) R = R * R;
    return R;
}

/// det(sI - M) via Hessenberg reduction and the La Budde recurrence.
inline Polynomial char_poly(const Matrix& M) {
    require(M.rows() == M.cols(), "char_poly: matrix must be square");
    const int n = static_cast<int>(M.rows());
    if (n == 0) return Polynomial{};
    Matrix H = n > 2 ? Matrix(Eigen::HessenbergDecomposition<Matrix>(M).matrixH()) : M;

    // p[i] is the full (low-to-high) coefficient vector of the leading i x i block.
    std::vector<std::vector<double>> p(static_cast<std::size_t>(n) + 1);
    p[0] = {1.0};
    auto h = [&](int r, int c) { return H(r - 1, c - 1); };  // 1-based view
    for (int i = 1; i <= n; ++i) {
        std::vector<double> next(static_cast<std::size_t>(i) + 1, 0.0);
        const auto& prev = p[static_cast<std::size_t>(i) - 1];
        for (std::size_t k = 0; k < prev.size(); ++k) {
            next[k + 1] += prev[k];
            next[k] -= h(i, i) * prev[k];
        }
        double sub = 1.0;
        for (int k = 1; k < i; ++k) {
            sub *= h(i - k + 1, i - k);
            const double coef = h(i - k, i) * sub;
            const auto& q = p[static_cast<std::size_t>(i - k - 1)];
            for (std::size_t j = 0; j < q.size(); ++j) next[j] -= coef * q[j];
        }
        p[static_cast<std::size_t>(i)] = std::move(next);
    }
    auto full = std::move(p[static_cast<std::size_t>(n)]);
    full.pop_back();
    return Polynomial(std::move(full));
}

/// All roots of p: companion eigenvalues followed by two Newton polishing steps.
inline std::vector<Complex> poly_roots(const Polynomial& p) {
    require(p.degree() >= 1, "poly_roots: degree must be at least 1");
    Eigen::EigenSolver<Matrix> es(p.companion(), false);
    require(es.info() == Eigen::Success, "poly_roots: eigenvalue iteration failed");
    std::vector<Complex> roots;
    roots.reserve(static_cast<std::size_t>(p.degree()));
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        Complex z = es.eigenvalues()[k];
        for (int it = 0; it < 2; ++it) {
            Complex dp{0.0, 0.0};
            Complex val{1.0, 0.0};
            for (int j = p.degree() - 1; j >= 0; --j) {
                dp = dp * z + val;
                val = val * z + p.coefficient(j);
            }
            if (std::abs(dp) < 1e-14) break;
            const Complex step = val / dp;
            const Complex cand = z - step;
            if (std::abs(p(cand)) < std::abs(p(z))) z = cand; else break;
        }
        roots.push_back(z);
    }
    return roots;
}

inline int numerical_rank(const Matrix& M) {
    if (M.size() == 0) return 0;
    Eigen::ColPivHouseholderQR<Matrix> qr(M);
    qr.setThreshold(tol::kRank);
    return static_cast<int>(qr.rank());
}

/// [B, AB, ..., A^{m-1}B]
inline Matrix controllability_matrix(const LTISystem& sys) {
    sys.validate();
    const int m = sys.order();
    Matrix W(m, m);
    Vector col = sys.B;
    for (int k = 0; k < m; ++k) {
        W.col(k) = col;
        col = sys.A * col;
    }
    return W;
}

inline bool is_controllable(const LTISystem& sys) {
    const Matrix W = controllability_matrix(sys);
    if (W.cwiseAbs().maxCoeff() == 0.0) return false;
    return numerical_rank(W) == sys.order();
}

/// [C; CA; ...; CA^{m-1}] for a single output row.
inline Matrix observability_matrix(const Matrix& A, const RowVector& C) {
    require(A.rows() == A.cols() && C.size() == A.rows(), "observability_matrix: dimension mismatch");
    const auto m = A.rows();
    Matrix W(m, m);
    RowVector row = C;
    for (Eigen::Index k = 0; k < m; ++k) {
        W.row(k) = row;
        row = row * A;
    }
    return W;
}

/// PBH test restricted to eigenvalues with non-negative real part.
inline bool is_detectable_pair(const Matrix& A, const Matrix& C) {
    require(A.rows() == A.cols() && C.cols() == A.rows(), "is_detectable_pair: dimension mismatch");
    const auto m = A.rows();
    Eigen::EigenSolver<Matrix> es(A, false);
    require(es.info() == Eigen::Success, "is_detectable_pair: eigenvalue iteration failed");
    using CMatrix = Eigen::MatrixXcd;
    for (Eigen::Index k = 0; k < m; ++k) {
        const Complex lambda = es.eigenvalues()[k];
        if (lambda.real() < -tol::kRank) continue;
        CMatrix pbh(m + C.rows(), m);
        pbh.topRows(m) = lambda * CMatrix::Identity(m, m) - A.cast<Complex>();
        pbh.bottomRows(C.rows()) = C.cast<Complex>();
        Eigen::JacobiSVD<CMatrix> svd(pbh);
        const auto& sv = svd.singularValues();
        const double cut = tol::kRank * std::max(1.0, sv(0));
        Eigen::Index rank = 0;
        for (Eigen::Index j = 0; j < sv.size(); ++j)
            if (sv(j) > cut) ++rank;
        if (rank < m) return false;
    }
    return true;
}

inline CanonicalForm to_controllable_canonical(const LTISystem& sys) {
    sys.validate();
    require(is_controllable(sys), "to_controllable_canonical: (A, B) is not controllable");
    const int m = sys.order();
    const Matrix W = controllability_matrix(sys);
    const RowVector q = W.inverse().row(m - 1);
    Matrix T(m, m);
    RowVector row = q;
    for (int k = 0; k < m; ++k) {
        T.row(k) = row;
        row = row * sys.A;
    }
    CanonicalForm cf;
    cf.T = T;
    cf.T_inv = T.inverse();
    cf.a = (T * sys.A * cf.T_inv).row(m - 1).transpose();
    return cf;
}

/// True when `cf` puts `sys` into the canonical shape within tolerance.
inline bool satisfies_canonical_shape(const LTISystem& sys, const CanonicalForm& cf, double tolerance = tol::kCanonical) {
    const int m = sys.order();
    const Matrix Abar = cf.T * sys.A * cf.T_inv;
    Matrix expected = Matrix::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) expected(i, i + 1) = 1.0;
    expected.row(m - 1) = cf.a.transpose();
    Vector e = Vector::Zero(m);
    e(m - 1) = 1.0;
    const double scale = std::max(1.0, sys.A.cwiseAbs().maxCoeff());
    return (Abar - expected).cwiseAbs().maxCoeff() <= tolerance * scale &&
           (cf.T * sys.B - e).cwiseAbs().maxCoeff() <= tolerance * scale;
}

}  // namespace hiord

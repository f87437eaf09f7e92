#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "hiord/gains.hpp"
#include "hiord/lti_tools.hpp"
#include "hiord/plants.hpp"
#include "hiord/scenarios.hpp"

using namespace hiord;

namespace {

// Durand-Kerner on the monic polynomial with lower coefficients c.
std::vector<Complex> dk_roots(const std::vector<double>& c) {
    const std::size_t n = c.size();
    auto eval = [&](Complex z) {
        Complex acc(1.0, 0.0);
        for (std::size_t k = n; k-- > 0;) acc = acc * z + c[k];
        return acc;
    };
    double radius = 1.0;
    for (double x : c) radius = std::max(radius, 1.0 + std::abs(x));
    std::vector<Complex> z(n);
    for (std::size_t k = 0; k < n; ++k) z[k] = std::polar(0.9 * radius, 0.4 + 2.0 * M_PI * double(k) / double(n));
    for (int it = 0; it < 5000; ++it) {
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Complex den(1.0, 0.0);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) den *= z[i] - z[j];
            const Complex step = eval(z[i]) / den;
            z[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-15 * radius) break;
    }
    return z;
}

double max_real(const std::vector<Complex>& r) {
    double m = -INFINITY;
    for (const auto& z : r) m = std::max(m, z.real());
    return m;
}

double max_abs(const std::vector<Complex>& r) {
    double m = 0.0;
    for (const auto& z : r) m = std::max(m, std::abs(z));
    return m;
}

std::vector<double> random_coeffs(std::mt19937_64& rng, int count) {
    std::uniform_real_distribution<double> U(0.05, 3.0);
    std::vector<double> a(static_cast<std::size_t>(count));
    for (auto& x : a) x = U(rng);
    return a;
}

// Lower coefficients of the monic polynomial with the given roots (conjugate-closed).
std::vector<double> from_roots(const std::vector<Complex>& roots) {
    std::vector<Complex> full{Complex(1.0)};
    for (const auto& r : roots) {
        std::vector<Complex> next(full.size() + 1, Complex(0.0));
        for (std::size_t k = 0; k < full.size(); ++k) {
            next[k] -= r * full[k];
            next[k + 1] += full[k];
        }
        full = next;
    }
    std::vector<double> c;
    for (std::size_t k = 0; k + 1 < full.size(); ++k) c.push_back(full[k].real());
    return c;
}

// Half the cases from random roots (so both verdicts appear), half from raw coefficients.
std::vector<double> random_polynomial(std::mt19937_64& rng, int rep, bool discrete) {
    std::uniform_int_distribution<int> deg(1, 6);
    const int d = deg(rng);
    if (rep % 2 == 0) {
        std::uniform_real_distribution<double> U(-4.0, 4.0);
        std::vector<double> c(static_cast<std::size_t>(d));
        for (auto& x : c) x = discrete ? 0.4 * U(rng) : U(rng);
        return c;
    }
    std::uniform_real_distribution<double> re(discrete ? -1.1 : -3.0, discrete ? 1.1 : 0.4);
    std::uniform_real_distribution<double> im(0.0, discrete ? 1.0 : 2.0);
    std::vector<Complex> roots;
    while (static_cast<int>(roots.size()) < d) {
        if (static_cast<int>(roots.size()) + 2 <= d && (rng() & 1)) {
            const Complex z(re(rng), im(rng));
            roots.push_back(z);
            roots.push_back(std::conj(z));
        } else {
            roots.emplace_back(re(rng), 0.0);
        }
    }
    return from_roots(roots);
}

}  // namespace

TEST_CASE("continuous gains from the robot example") {
    const std::vector<double> a{1, 3, 3};
    const auto g = make_continuous_gains(a);
    CHECK(g.m == 4);
    CHECK(g.K1 == (RowVector(4) << 0, -1, -3, -3).finished());
    CHECK(g.K2 == (RowVector(4) << 1, 3, 3, 1).finished());
}

TEST_CASE("smallest continuous gain set") {
    const std::vector<double> a{1};
    const auto g = make_continuous_gains(a);
    CHECK(g.K1 == (RowVector(2) << 0, -1).finished());
    CHECK(g.K2 == (RowVector(2) << 1, 1).finished());
}

TEST_CASE("discrete gains from the third example") {
    const std::vector<double> b{0.125, 0.75, 1.5};
    const auto g = make_discrete_gains(b);
    CHECK(g.K4 == (RowVector(4) << 0.125, 0.625, 0.75, -0.5).finished());
    CHECK(g.K5 == (RowVector(4) << 0.125, 0.75, 1.5, 1).finished());
    const std::vector<double> b1{0.3};
    const auto h = make_discrete_gains(b1);
    CHECK(h.K4 == (RowVector(2) << 0.3, 0.7).finished());
    CHECK(h.K5 == (RowVector(2) << 0.3, 1.0).finished());
}

TEST_CASE("empty coefficient vectors are rejected") {
    const std::vector<double> none;
    CHECK_THROWS_AS(make_continuous_gains(none), Error);
    CHECK_THROWS_AS(make_discrete_gains(none), Error);
}

TEST_CASE("gain identities hold for random coefficients") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int m = 2 + rep % 7;
        std::vector<double> a(static_cast<std::size_t>(m - 1)), b(a.size());
        for (auto& x : a) x = U(rng);
        for (auto& x : b) x = U(rng);
        const auto chain = integrator_chain(m);
        const auto cg = make_continuous_gains(a);
        const auto dg = make_discrete_gains(b);
        const Matrix& Ad = chain.A;  // discrete agents: x_j[k+1] = x_{j+1}[k]
        worst = std::max(worst, (cg.K2 * (chain.A + chain.B * cg.K1)).cwiseAbs().maxCoeff());
        worst = std::max(worst, std::abs(cg.K2.dot(chain.B) - 1.0));
        worst = std::max(worst, (dg.K5 * (Ad + chain.B * dg.K4) - dg.K5).cwiseAbs().maxCoeff());
        worst = std::max(worst, std::abs(dg.K5.dot(chain.B) - 1.0));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("A + B K1 has one pole at zero plus the chosen polynomial") {
    std::mt19937_64 rng(22);
    int checked = 0;
    for (int rep = 0; rep < 200 && checked < 50; ++rep) {
        const int m = 2 + rep % 5;
        const auto a = random_coeffs(rng, m - 1);
        if (!is_hurwitz(Polynomial(a))) continue;
        ++checked;
        const auto chain = integrator_chain(m);
        const auto g = make_continuous_gains(a);
        const auto p = char_poly(chain.A + chain.B * g.K1);
        // s * (s^{m-1} + a_{m-1} s^{m-2} + ... + a_1): constant term 0, then a_1 .. a_{m-1}
        CHECK(std::abs(p.coefficient(0)) < 1e-10);
        for (int k = 1; k < m; ++k) CHECK(p.coefficient(k) == Catch::Approx(a[static_cast<std::size_t>(k - 1)]).margin(1e-9));
    }
    CHECK(checked == 50);
}

TEST_CASE("default coefficients are binomial") {
    CHECK(default_continuous_coefficients(4) == std::vector<double>{1, 3, 3});
    CHECK(default_discrete_coefficients(4) == std::vector<double>{0.125, 0.75, 1.5});
}

TEST_CASE("stability tests on fixed polynomials") {
    CHECK(is_hurwitz(Polynomial({1, 3, 3})));
    CHECK_FALSE(is_hurwitz(Polynomial({-1, 0})));
    CHECK_FALSE(is_hurwitz(Polynomial({1, 0})));       // roots on the imaginary axis
    CHECK_FALSE(is_hurwitz(Polynomial({-1, 3, 3})));   // the necessity coefficients
    CHECK(is_schur(Polynomial({0.125, 0.75, 1.5})));
    CHECK_FALSE(is_schur(Polynomial({-2})));
    CHECK_FALSE(is_schur(Polynomial({1})));            // root -1 on the unit circle
    CHECK_FALSE(is_schur(Polynomial({1, 0})));         // roots +-i
}

TEST_CASE("is_hurwitz agrees with a root oracle") {
    std::mt19937_64 rng(23);
    int disagreements = 0, stable = 0, ambiguous = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const auto c = random_polynomial(rng, rep, false);
        const double re = max_real(dk_roots(c));
        if (std::abs(re) < 1e-6) {
            ++ambiguous;
            continue;
        }
        stable += re < 0;
        if (is_hurwitz(Polynomial(c)) != (re < 0)) ++disagreements;
    }
    CHECK(disagreements == 0);
    CHECK(ambiguous < 5);
    CHECK(stable > 100);
    CHECK(stable < 900);
}

TEST_CASE("is_schur agrees with a root oracle") {
    std::mt19937_64 rng(24);
    int disagreements = 0, stable = 0, ambiguous = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const auto c = random_polynomial(rng, rep, true);
        const double r = max_abs(dk_roots(c));
        if (std::abs(r - 1.0) < 1e-6) {
            ++ambiguous;
            continue;
        }
        stable += r < 1;
        if (is_schur(Polynomial(c)) != (r < 1)) ++disagreements;
    }
    CHECK(disagreements == 0);
    CHECK(ambiguous < 5);
    CHECK(stable > 100);
    CHECK(stable < 900);
}

TEST_CASE("observer placement on a double integrator") {
    const auto chain = integrator_chain(2);
    const auto og = place_observer_gain(chain.A, chain.C, Polynomial::power_of_linear(1.0, 2));
    CHECK(og.K(0) == Catch::Approx(-2.0).margin(1e-12));
    CHECK(og.K(1) == Catch::Approx(-1.0).margin(1e-12));
    CHECK(og.residual < 1e-12);
}

TEST_CASE("observer placement hits the requested polynomial") {
    std::mt19937_64 rng(25);
    for (int m = 2; m <= 6; ++m) {
        const auto chain = integrator_chain(m);
        const auto desired = Polynomial(from_roots([&] {
            std::vector<Complex> r;
            std::uniform_real_distribution<double> U(-3.0, -0.5);
            for (int k = 0; k < m; ++k) r.emplace_back(U(rng), 0.0);
            return r;
        }()));
        const auto og = place_observer_gain(chain.A, chain.C, desired);
        const auto got = char_poly(chain.A + og.K * chain.C);
        for (int k = 0; k < m; ++k) CHECK(got.coefficient(k) == Catch::Approx(desired.coefficient(k)).margin(1e-7));
    }
}

TEST_CASE("observer placement is consistent with the printed aircraft gain") {
    const auto air = AircraftParams{}.system();
    const Vector K3 = example2_observer_gain();
    const auto p = char_poly(air.A + K3 * air.C);
    CHECK(is_hurwitz(p));
    const auto og = place_observer_gain(air.A, air.C, p);
    CHECK((og.K - K3).cwiseAbs().maxCoeff() < 1e-8);

    // the same gain when the polynomial is the plant's own: K = 0
    const auto own = place_observer_gain(air.A, air.C, char_poly(air.A));
    CHECK(own.K.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("printed discrete observer gain is stabilising") {
    const auto chain = integrator_chain(4);
    CHECK(is_schur(char_poly(chain.A + example3_observer_gain() * chain.C)));
}

TEST_CASE("observer placement rejects unobservable pairs") {
    const auto chain = integrator_chain(3);
    RowVector C = RowVector::Zero(3);
    C(2) = 1.0;  // last state only: the chain above it is invisible
    CHECK_THROWS_AS(place_observer_gain(chain.A, C, Polynomial::power_of_linear(2.0, 3)), Error);
}

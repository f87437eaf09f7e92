#pragma once

// Physical plant models for the built-in scenarios.

#include <array>
#include <cmath>

#include "error.hpp"
#include "lti_tools.hpp"

namespace hiord {

/// Single-link flexible-joint robot. Angles are in radians.
struct FlexibleJointParams {
    double I = 1.0;    // link inertia
    double J = 3.2;    // actuator inertia
    double M = 1.5;    // link mass
    double g = 9.8;
    double L = 0.8;    // joint to centre of mass
    double k = 2.5;    // spring torsion coefficient

    double mgl() const { return M * g * L; }

    void validate() const {
        require(I > 0 && J > 0 && M > 0 && g > 0 && L > 0 && k > 0, "FlexibleJointParams: all parameters must be positive");
    }
};

/// Physical state (q1, dq1, q2, dq2) of one robot.
using JointState = std::array<double, 4>;

struct JointAccel {
    double ddq1 = 0.0;
    double ddq2 = 0.0;
};

inline JointAccel robot_rhs(double q1, double q2, double dq1, double dq2, double tau, const FlexibleJointParams& p) {
    (void)dq1;
    (void)dq2;
    const double spring = p.k * (q1 - q2);
    return {(-p.mgl() * std::sin(q1) - spring) / p.I, (tau + spring) / p.J};
}

/// Linearizing coordinates: x = (q1, dq1, ddq1, dddq1).
inline Vector fl_state(double q1, double dq1, double q2, double dq2, const FlexibleJointParams& p) {
    Vector x(4);
    x << q1, dq1, -p.mgl() * std::sin(q1) / p.I - p.k * (q1 - q2) / p.I,
        -p.mgl() * dq1 * std::cos(q1) / p.I - p.k * (dq1 - dq2) / p.I;
    return x;
}

/**
 * Torque that makes d/dt x_4 = u exactly.
 *
 * tau = (IJ/k) ( u - (MgL/I) sin q1 (dq1^2 + (MgL/I) cos q1 + k/I)
 *                  - (k/I)(q1 - q2)(k/I + k/J + (MgL/I) cos q1) )
 */
inline double fl_control(double u, double q1, double dq1, double q2, double dq2, const FlexibleJointParams& p) {
    (void)dq2;
    const double a = p.mgl() / p.I;
    const double kI = p.k / p.I;
    const double kJ = p.k / p.J;
    return p.I * p.J / p.k *
           (u - a * std::sin(q1) * (dq1 * dq1 + a * std::cos(q1) + kI) - kI * (q1 - q2) * (kI + kJ + a * std::cos(q1)));
}

/// Simplified aircraft vertical-motion model; state (alpha, dalpha, h, dh), input E.
struct AircraftParams {
    double J = 1.0;
    double m = 1.0;
    double b = 4.0;
    double C_ZE = 1.0;
    double C_ZW = 5.0;
    double l = 3.0;
    double d = 0.2;

    LTISystem system() const {
        require(J > 0 && m > 0, "AircraftParams: J and m must be positive");
        LTISystem s;
        s.A = Matrix::Zero(4, 4);
        s.A(0, 1) = 1.0;
        s.A(1, 0) = -(C_ZE * l + C_ZW * d) / J;
        s.A(1, 1) = -b / J;
        s.A(2, 3) = 1.0;
        s.A(3, 0) = (C_ZE + C_ZW) / m;
        s.B = Vector::Zero(4);
        s.B(1) = C_ZE * l / J;
        s.B(3) = -C_ZE / m;
        s.C = RowVector::Zero(4);
        s.C(2) = 1.0;  // altitude
        return s;
    }
};

}  // namespace hiord

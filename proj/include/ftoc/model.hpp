#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace ftoc {

using Vec5 = std::array<double, 5>;
using Mat5 = std::array<std::array<double, 5>, 5>;

struct StatePoint {
    double T = 0.0;   // tumor cells
    double I = 0.0;   // immune cells
    double F = 0.0;   // fat cells
    double D1 = 0.0;  // chemotherapeutic drug concentration
    double D2 = 0.0;  // immunotherapeutic drug concentration

    Vec5 to_vec() const { return {T, I, F, D1, D2}; }
    static StatePoint from_vec(const Vec5& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
};

struct ControlPoint {
    double u1 = 0.0;  // chemo dose, in [0,1]
    double u2 = 0.0;  // immuno dose, in [0,1]
};

struct AdjointPoint {
    double l1 = 0.0, l2 = 0.0, l3 = 0.0, l4 = 0.0, l5 = 0.0;

    Vec5 to_vec() const { return {l1, l2, l3, l4, l5}; }
    static AdjointPoint from_vec(const Vec5& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
};

// Base (unexponentiated) model coefficients. Every rate enters the dynamics
// as base^alpha; see Rates below.
struct ModelParams {
    double alpha = 0.9;     // fractional order, in (0,1)
    double r = 0.00431;     // tumor growth rate (1/day)
    double p = 1.02e-9;     // reciprocal tumor carrying capacity
    double xi1 = 6.41e-11;  // tumor loss to immune cells
    double xi2 = 3.42e-6;   // immune loss to tumor cells
    double c1 = kC1Default; // tumor gain from fat cells (see note below)
    double c2 = kC2Default; // fat loss to tumor cells
    double q1 = 0.08;       // chemo kill rate on T
    double q2 = 2e-11;      // chemo kill rate on I
    double q3 = 2e-11;      // chemo kill rate on F
    double s = 0.33;        // immune source rate
    double rho = 0.0125;    // immune recruitment by tumor
    double h = 2.02e7;      // immune-response steepness
    double mu = 0.204;      // immune death rate
    double beta = 0.125;    // immune recruitment by D2
    double g = 2e7;         // steepness of the beta response
    double d = 0.00431 / 100.0;  // fat growth rate
    double eps = 1.02e-9;        // reciprocal fat carrying capacity
    double gamma1 = 0.1;    // D1 decay rate
    double gamma2 = 1.0;    // D2 decay rate
    double omega1 = 1.0;    // cost weight on u1^2
    double omega2 = 2.0;    // cost weight on u2^2

    // c1 and c2 have no measured defaults. c2 reuses the reciprocal fat
    // carrying capacity (the same convention the other derived rates follow),
    // which keeps the fat pool intact at therapeutic tumor loads. c1 is
    // calibrated toward the chemotherapy reference cost 81.3347 at
    // (alpha = 0.9, gamma1 = 0.1, t_f = 120, dt = 0.25): the cost is
    // increasing in c1, but the admissible range is capped by two qualitative
    // requirements. Above roughly 0.045 the uncontrolled immune population no
    // longer plateaus by day 120 (the tumor outruns it), and above roughly
    // 0.09 the high-gamma1 optimal-control cells cross into tumor escape and
    // the cost stops decreasing in alpha. Below roughly 0.035 the uncontrolled
    // tumor stops growing monotonically at alpha = 0.95. c1 = 0.04 satisfies
    // all three with margin; the exact-anchor coupling (near c1 = 0.276) is
    // unattainable under them, and the residual anchor deviation is reported
    // by the tooling. Override both defaults in any run whose conclusions
    // depend on the fat coupling.
    static constexpr double kC1Default = 0.04;
    static constexpr double kC2Default = 1.02e-9;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("alpha must lie in (0,1)");
        for (double v : {r, p, xi1, xi2, c1, c2, q1, q2, q3, s, rho, h, mu, beta, g,
                         d, eps, gamma1, gamma2, omega1, omega2})
            if (!(v > 0.0)) throw std::invalid_argument("model rates must be positive");
    }
};

inline ModelParams default_params() { return ModelParams{}; }

// Effective coefficients base^alpha, derived on demand so they always track
// the current alpha.
struct Rates {
    double r, p, xi1, xi2, c1, c2, q1, q2, q3, s, rho, h, mu, beta, g, d, eps,
        gamma1, gamma2;
    double omega1, omega2;  // cost weights, not exponentiated
    double alpha;

    static Rates from(const ModelParams& m) {
        auto e = [&](double v) { return std::pow(v, m.alpha); };
        return {e(m.r),  e(m.p),   e(m.xi1),    e(m.xi2),    e(m.c1),
                e(m.c2), e(m.q1),  e(m.q2),     e(m.q3),     e(m.s),
                e(m.rho), e(m.h),  e(m.mu),     e(m.beta),   e(m.g),
                e(m.d),  e(m.eps), e(m.gamma1), e(m.gamma2), m.omega1,
                m.omega2, m.alpha};
    }
};

inline Vec5 state_rhs(const StatePoint& x, const ControlPoint& u, const Rates& a) {
    const double T = x.T, I = x.I, F = x.F, D1 = x.D1, D2 = x.D2;
    const double den = a.h + T * T + F * F;
    Vec5 f;
    f[0] = a.r * T * (1.0 - a.p * T) - a.xi1 * T * I + a.c1 * T * F - a.q1 * D1 * T;
    f[1] = a.s + a.rho * T * T * I / den + a.beta * D2 * I / (a.g + D2) -
           a.xi2 * T * I - a.mu * I - a.q2 * D1 * I;
    f[2] = a.d * F * (1.0 - a.eps * F) - a.c2 * F * T - a.q3 * D1 * F;
    f[3] = u.u1 - a.gamma1 * D1;
    f[4] = u.u2 - a.gamma2 * D2;
    return f;
}

inline Vec5 state_rhs(const StatePoint& x, const ControlPoint& u, const ModelParams& m) {
    return state_rhs(x, u, Rates::from(m));
}

// d(state_rhs)/dx; rows 4-5 are diagonal and the (1,5), (3,2), (3,5) entries
// vanish identically.
inline Mat5 state_jacobian(const StatePoint& x, const ControlPoint&, const Rates& a) {
    const double T = x.T, I = x.I, F = x.F, D1 = x.D1, D2 = x.D2;
    const double den = a.h + T * T + F * F;
    const double den2 = den * den;
    const double gd = a.g + D2;
    Mat5 J{};
    J[0][0] = a.r - 2.0 * a.r * a.p * T - a.xi1 * I + a.c1 * F - a.q1 * D1;
    J[0][1] = -a.xi1 * T;
    J[0][2] = a.c1 * T;
    J[0][3] = -a.q1 * T;
    J[1][0] = 2.0 * a.rho * T * I * (a.h + F * F) / den2 - a.xi2 * I;
    J[1][1] = a.rho * T * T / den + a.beta * D2 / gd - a.xi2 * T - a.mu - a.q2 * D1;
    J[1][2] = -2.0 * a.rho * T * T * I * F / den2;
    J[1][3] = -a.q2 * I;
    J[1][4] = a.beta * a.g * I / (gd * gd);
    J[2][0] = -a.c2 * F;
    J[2][2] = a.d - 2.0 * a.d * a.eps * F - a.c2 * T - a.q3 * D1;
    J[2][3] = -a.q3 * F;
    J[3][3] = -a.gamma1;
    J[4][4] = -a.gamma2;
    return J;
}

inline Mat5 state_jacobian(const StatePoint& x, const ControlPoint& u,
                           const ModelParams& m) {
    return state_jacobian(x, u, Rates::from(m));
}

// Right Caputo derivative of the adjoint variables: J(x)^T lambda plus the
// running-cost gradient (the +1 on the tumor row).
inline Vec5 adjoint_rhs(const AdjointPoint& l, const StatePoint& x, const Rates& a) {
    const double T = x.T, I = x.I, F = x.F, D1 = x.D1, D2 = x.D2;
    const double den = a.h + T * T + F * F;
    const double den2 = den * den;
    const double gd = a.g + D2;
    Vec5 f;
    f[0] = (a.r - 2.0 * a.r * a.p * T - a.xi1 * I + a.c1 * F - a.q1 * D1) * l.l1 +
           (2.0 * a.rho * T * I * (a.h + F * F) / den2 - a.xi2 * I) * l.l2 -
           a.c2 * F * l.l3 + 1.0;
    f[1] = -a.xi1 * T * l.l1 +
           (a.rho * T * T / den + a.beta * D2 / gd - a.xi2 * T - a.mu - a.q2 * D1) * l.l2;
    f[2] = a.c1 * T * l.l1 - 2.0 * a.rho * T * T * I * F / den2 * l.l2 +
           (a.d - 2.0 * a.d * a.eps * F - a.c2 * T - a.q3 * D1) * l.l3;
    f[3] = -a.q1 * T * l.l1 - a.q2 * I * l.l2 - a.q3 * F * l.l3 - a.gamma1 * l.l4;
    f[4] = a.beta * a.g * I / (gd * gd) * l.l2 - a.gamma2 * l.l5;
    return f;
}

inline Vec5 adjoint_rhs(const AdjointPoint& l, const StatePoint& x,
                        const ModelParams& m) {
    return adjoint_rhs(l, x, Rates::from(m));
}

inline double cost_integrand(const StatePoint& x, const ControlPoint& u,
                             const Rates& a) {
    return x.T + a.omega1 * u.u1 * u.u1 + a.omega2 * u.u2 * u.u2;
}

inline double cost_integrand(const StatePoint& x, const ControlPoint& u,
                             const ModelParams& m) {
    return x.T + m.omega1 * u.u1 * u.u1 + m.omega2 * u.u2 * u.u2;
}

}  // namespace ftoc

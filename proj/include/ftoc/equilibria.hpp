#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftoc/model.hpp"

namespace ftoc {

enum class EquilibriumKind { tumor_free, coexisting };
enum class Verdict { stable, unstable, marginal };

struct NonexistentEquilibrium : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EquilibriumPoint {
    EquilibriumKind kind;
    StatePoint point;
    ControlPoint controls;  // constant doses under which it was computed
    double residual = 0.0;  // relative fixed-point residual
};

struct StabilityReport {
    std::array<std::complex<double>, 5> eigenvalues;
    double matignon_margin = 0.0;  // min_i |arg(lambda_i)| - alpha*pi/2
    Verdict verdict = Verdict::unstable;
    std::map<std::string, bool> conditions;
    // Characteristic-cubic data, populated for coexisting points only.
    double cubic_c1 = 0.0, cubic_c2 = 0.0, cubic_c3 = 0.0, discriminant = 0.0;
};

struct ExistenceCondition {
    double margin;  // lhs - rhs of the strict inequality
    bool holds() const { return margin > 0.0; }
};

namespace detail {

// Per-row sum of absolute term magnitudes of the state RHS; the denominator
// for relative residual certificates.
inline Vec5 rhs_scale(const StatePoint& x, const ControlPoint& u, const Rates& a) {
    const double T = x.T, I = x.I, F = x.F, D1 = x.D1, D2 = x.D2;
    const double den = a.h + T * T + F * F;
    Vec5 s;
    s[0] = std::abs(a.r * T) + std::abs(a.r * a.p * T * T) + std::abs(a.xi1 * T * I) +
           std::abs(a.c1 * T * F) + std::abs(a.q1 * D1 * T);
    s[1] = std::abs(a.s) + std::abs(a.rho * T * T * I / den) +
           std::abs(a.beta * D2 * I / (a.g + D2)) + std::abs(a.xi2 * T * I) +
           std::abs(a.mu * I) + std::abs(a.q2 * D1 * I);
    s[2] = std::abs(a.d * F) + std::abs(a.d * a.eps * F * F) +
           std::abs(a.c2 * F * T) + std::abs(a.q3 * D1 * F);
    s[3] = std::abs(u.u1) + std::abs(a.gamma1 * D1);
    s[4] = std::abs(u.u2) + std::abs(a.gamma2 * D2);
    return s;
}

inline double relative_residual(const StatePoint& x, const ControlPoint& u,
                                const Rates& a) {
    const Vec5 f = state_rhs(x, u, a);
    const Vec5 s = rhs_scale(x, u, a);
    double worst = 0.0;
    for (int c = 0; c < 5; ++c)
        worst = std::max(worst, std::abs(f[c]) / std::max(s[c], 1e-300));
    return worst;
}

inline Eigen::Matrix<double, 5, 5> eigen_jacobian(const StatePoint& x,
                                                  const Rates& a) {
    const Mat5 J = state_jacobian(x, ControlPoint{}, a);
    Eigen::Matrix<double, 5, 5> M;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) M(i, j) = J[i][j];
    return M;
}

inline std::array<std::complex<double>, 5> numeric_eigenvalues(const StatePoint& x,
                                                               const Rates& a) {
    Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> es(eigen_jacobian(x, a), false);
    std::array<std::complex<double>, 5> out;
    for (int i = 0; i < 5; ++i) out[i] = es.eigenvalues()(i);
    return out;
}

inline double matignon_margin(const std::array<std::complex<double>, 5>& eig,
                              double alpha) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& l : eig)
        m = std::min(m, std::abs(std::arg(l)) - alpha * M_PI / 2.0);
    return m;
}

inline Verdict verdict_from_margin(double margin, double tol = 1e-9) {
    if (margin > tol) return Verdict::stable;
    if (margin < -tol) return Verdict::unstable;
    return Verdict::marginal;
}

}  // namespace detail

struct TumorFreeExistence {
    ExistenceCondition immune_positive;  // I-hat denominator stays positive
    ExistenceCondition fat_positive;     // d^a g1^a > q3^a u1
    bool holds() const { return immune_positive.holds() && fat_positive.holds(); }
};

inline TumorFreeExistence tumor_free_existence(const ModelParams& params, double u1,
                                               double u2) {
    const Rates a = Rates::from(params);
    const double lhs = a.mu * a.g * a.gamma1 * a.gamma2 + a.q2 * a.g * u1 * a.gamma2 +
                       a.q2 * u1 * u2 + u2 * a.gamma1 * a.mu;
    return {{lhs - u2 * a.gamma1 * a.beta}, {a.d * a.gamma1 - a.q3 * u1}};
}

// Closed-form tumor-free point (0, I, F, u1/g1^a, u2/g2^a).
inline EquilibriumPoint tumor_free_equilibrium(const ModelParams& params, double u1,
                                               double u2) {
    if (u1 < 0.0 || u2 < 0.0)
        throw std::invalid_argument("doses must be non-negative");
    const Rates a = Rates::from(params);
    const double D1 = u1 / a.gamma1;
    const double D2 = u2 / a.gamma2;
    const double G = a.g + D2;
    const double denom = (a.mu + a.q2 * D1) * G - a.beta * D2;
    const double I = a.s * G / denom;
    const double F = 1.0 / a.eps - a.q3 / (a.d * a.eps) * D1;
    const auto ex = tumor_free_existence(params, u1, u2);
    if (I <= 0.0 || !ex.immune_positive.holds())
        throw NonexistentEquilibrium(
            "tumor-free equilibrium does not exist: immune denominator condition "
            "violated (margin " + std::to_string(ex.immune_positive.margin) + ")");
    if (F <= 0.0 || !ex.fat_positive.holds())
        throw NonexistentEquilibrium(
            "tumor-free equilibrium does not exist: fat positivity condition "
            "violated (margin " + std::to_string(ex.fat_positive.margin) + ")");
    EquilibriumPoint eq{EquilibriumKind::tumor_free, {0.0, I, F, D1, D2}, {u1, u2}, 0.0};
    eq.residual = detail::relative_residual(eq.point, eq.controls, a);
    return eq;
}

// Closed-form eigenvalues at the tumor-free point; the Jacobian there is
// triangular under the ordering (T, D1, D2, I, F).
inline std::array<double, 5> tumor_free_eigenvalues(const ModelParams& params,
                                                    double u1, double u2) {
    const Rates a = Rates::from(params);
    const auto eq = tumor_free_equilibrium(params, u1, u2);
    const double I = eq.point.I, F = eq.point.F, D1 = eq.point.D1, D2 = eq.point.D2;
    return {-a.gamma1, -a.gamma2,
            a.beta * D2 / (a.g + D2) - a.mu - a.q2 * D1,
            a.d - 2.0 * a.d * a.eps * F - a.q3 * D1,
            a.r - a.xi1 * I + a.c1 * F - a.q1 * D1};
}

inline StabilityReport tumor_free_stability(const ModelParams& params, double u1,
                                            double u2) {
    const Rates a = Rates::from(params);
    const auto eq = tumor_free_equilibrium(params, u1, u2);
    const auto closed = tumor_free_eigenvalues(params, u1, u2);

    StabilityReport rep;
    for (int i = 0; i < 5; ++i) rep.eigenvalues[i] = closed[i];
    rep.matignon_margin = detail::matignon_margin(rep.eigenvalues, params.alpha);
    rep.verdict = detail::verdict_from_margin(rep.matignon_margin);

    const double ihat = eq.point.I;
    rep.conditions["fat_decay"] = a.q3 * u1 < a.d * a.gamma1;
    rep.conditions["immune_decay"] =
        a.beta * a.gamma1 * u2 < (a.gamma1 * a.mu + a.q2 * u1) * (a.gamma2 * a.g + u2);
    rep.conditions["immune_dominance"] =
        ihat > a.r / a.xi1 + a.c1 / (a.xi1 * a.eps) -
                   (a.c1 * a.q3 / (a.xi1 * a.d * a.eps) + a.q1 / (a.xi1 * a.gamma1)) * u1;

    // Cross-validate the closed forms against a dense eigensolve.
    auto numeric = detail::numeric_eigenvalues(eq.point, a);
    double worst = 0.0;
    for (double ev : closed) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& nv : numeric) best = std::min(best, std::abs(nv - ev));
        worst = std::max(worst, best / std::max(1.0, std::abs(ev)));
    }
    rep.conditions["closed_form_matches_numeric"] = worst <= 1e-9;
    return rep;
}

// Coefficients of the reduced quartic in the coexisting immune level, plus
// the affine maps back to T and F.
struct CoexistingAnalysis {
    std::array<double, 5> m;  // m[0]..m[4]
    double k1, k2, k3, k4, k5, k6, k7;
    int descartes_case = 1;   // sign-pattern case index, 1..8
    std::vector<double> real_roots;
    std::vector<EquilibriumPoint> candidates;
};

inline CoexistingAnalysis coexisting_analysis(const ModelParams& params, double u1,
                                              double u2) {
    if (u1 < 0.0 || u2 < 0.0)
        throw std::invalid_argument("doses must be non-negative");
    const Rates a = Rates::from(params);
    CoexistingAnalysis out;
    const double D1 = u1 / a.gamma1;
    const double D2 = u2 / a.gamma2;

    const double k1 = 1.0 / a.eps - a.q3 / (a.eps * a.d) * D1;
    const double k2 = -a.c2 / (a.eps * a.d);
    const double k3 = 1.0 / a.p - a.q1 / (a.p * a.r) * D1;
    const double pr = a.p * a.r;
    const double k4 = (k3 * pr + k1 * a.c1) / (pr - a.c1 * k2);
    const double k5 = -a.xi1 / (pr - a.c1 * k2);
    const double k6 = k1 + k2 * k4;
    const double k7 = k2 * k5;
    out.k1 = k1; out.k2 = k2; out.k3 = k3; out.k4 = k4;
    out.k5 = k5; out.k6 = k6; out.k7 = k7;

    const double G = a.g + D2;
    const double t1 = G * a.xi2;
    const double t2 = G * (a.mu + a.q2 * D1) - a.beta * D2;
    const double t3 = G * (a.mu + a.q2 * D1) - (a.rho * a.g + a.rho * D2 + a.beta * D2);
    const double t4 = t1 * a.h;
    const double t5 = -G * a.s;
    const double t6 = t2 * a.h;
    const double t7 = t5 * a.h;

    auto& m = out.m;
    m[4] = t1 * k5 * (k5 * k5 + k7 * k7);
    m[3] = t1 * (3.0 * k4 * k5 * k5 + k4 * k7 * k7 + 2.0 * k5 * k6 * k7) +
           t2 * k7 * k7 + t3 * k5 * k5;
    m[2] = t1 * (3.0 * k4 * k4 * k5 + 2.0 * k4 * k6 * k7 + k5 * k6 * k6) +
           t2 * 2.0 * k6 * k7 + t3 * 2.0 * k4 * k5 + t4 * k5 +
           t5 * (k5 * k5 + k7 * k7);
    m[1] = t1 * k4 * (k4 * k4 + k6 * k6) + t2 * k6 * k6 + t3 * k4 * k4 + t4 * k4 +
           t5 * (2.0 * k4 * k5 + 2.0 * k6 * k7) + t6;
    m[0] = t5 * (k4 * k4 + k6 * k6) + t7;

    // Descartes case index from the signs of (m1, m2, m3); m4 < 0 and m0 < 0
    // structurally.
    const bool s1 = m[1] > 0.0, s2 = m[2] > 0.0, s3 = m[3] > 0.0;
    if (!s1 && !s2 && !s3) out.descartes_case = 1;
    else if (s1 && !s2 && !s3) out.descartes_case = 2;
    else if (!s1 && s2 && !s3) out.descartes_case = 3;
    else if (s1 && s2 && !s3) out.descartes_case = 4;
    else if (!s1 && !s2 && s3) out.descartes_case = 5;
    else if (!s1 && s2 && s3) out.descartes_case = 6;
    else if (s1 && s2 && s3) out.descartes_case = 7;
    else out.descartes_case = 8;

    // Companion-matrix root solve. The raw coefficients (and the roots) span
    // dozens of orders of magnitude, so a single eigensolve in double loses
    // the small roots in its noise floor. Solve twice -- once on the
    // Fujiwara-rescaled quartic (resolves the large roots) and once on its
    // reversal (resolves the small ones) -- then polish every eigenvalue with
    // complex Newton on the rescaled quartic, classify, and deduplicate.
    const auto companion_roots = [](const std::array<double, 5>& c) {
        Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
        C(1, 0) = C(2, 1) = C(3, 2) = 1.0;
        for (int i = 0; i < 4; ++i) C(i, 3) = -c[i] / c[4];
        Eigen::EigenSolver<Eigen::Matrix4d> es(C, false);
        std::array<std::complex<double>, 4> r;
        for (int i = 0; i < 4; ++i) r[i] = es.eigenvalues()(i);
        return r;
    };

    double sigma = 0.0;
    for (int i = 0; i < 4; ++i)
        sigma = std::max(sigma, std::pow(std::abs(m[i] / m[4]), 1.0 / (4 - i)));
    sigma = std::max(sigma, 1e-300);
    std::array<double, 5> q;  // q_i = m_i sigma^i, roots at I/sigma
    {
        double pw = 1.0;
        for (int i = 0; i < 5; ++i) {
            q[i] = m[i] * pw;
            pw *= sigma;
        }
        const double top = std::abs(q[4]);
        for (auto& v : q) v /= top;
    }
    std::array<double, 5> rev;  // reversed: roots at sigma/I
    for (int i = 0; i < 5; ++i) rev[i] = q[4 - i];

    std::vector<std::complex<double>> seeds;
    for (const auto& y : companion_roots(q)) seeds.push_back(y);
    for (const auto& y : companion_roots(rev))
        if (std::abs(y) > 1e-300) seeds.push_back(1.0 / y);

    std::vector<double> roots;
    for (std::complex<double> y : seeds) {
        for (int it = 0; it < 60; ++it) {
            std::complex<double> v = 0.0, dv = 0.0;
            for (int j = 4; j >= 0; --j) {
                dv = dv * y + v;
                v = v * y + q[j];
            }
            if (dv == std::complex<double>(0.0)) break;
            const std::complex<double> step = v / dv;
            y -= step;
            if (std::abs(step) <= 1e-15 * (1e-300 + std::abs(y))) break;
        }
        if (std::abs(y.imag()) > 1e-6 * std::abs(y)) continue;
        // Residual certificate against the termwise magnitude sum.
        double val = 0.0, mag = 0.0, pw = 1.0;
        const double yr = y.real();
        for (int j = 4; j >= 0; --j) val = val * yr + q[j];
        for (int j = 0; j <= 4; ++j) {
            mag += std::abs(q[j]) * pw;
            pw *= std::abs(yr);
        }
        if (std::abs(val) > 1e-7 * std::max(mag, 1e-300)) continue;
        roots.push_back(sigma * yr);
    }
    std::sort(roots.begin(), roots.end());
    for (double r : roots) {
        if (!out.real_roots.empty() &&
            std::abs(r - out.real_roots.back()) <=
                1e-6 * (std::abs(r) + std::abs(out.real_roots.back())))
            continue;
        out.real_roots.push_back(r);
    }

    for (double I : out.real_roots) {
        if (I <= 0.0) continue;
        const double T = k4 + k5 * I;
        const double F = k6 + k7 * I;
        if (T <= 0.0 || F <= 0.0) continue;
        // Bounds on T and F restated from the positivity of the affine maps.
        if (!(T < (a.d * a.gamma1 - a.q3 * u1) / (a.gamma1 * a.c2))) continue;
        if (!(I < (k3 * pr + k1 * a.c1) / a.xi1)) continue;
        EquilibriumPoint eq{EquilibriumKind::coexisting, {T, I, F, D1, D2},
                           {u1, u2}, 0.0};
        eq.residual = detail::relative_residual(eq.point, eq.controls, a);
        if (eq.residual <= 1e-6) out.candidates.push_back(eq);
    }
    return out;
}

inline std::vector<EquilibriumPoint> coexisting_candidates(const ModelParams& params,
                                                           double u1, double u2) {
    return coexisting_analysis(params, u1, u2).candidates;
}

// Stability of a coexisting point: two eigenvalues are -g1^a and -g2^a, the
// rest are roots of a cubic whose coefficients come from the leading 3x3
// Jacobian block.
inline StabilityReport coexisting_stability(const EquilibriumPoint& eq,
                                            const ModelParams& params) {
    if (eq.kind != EquilibriumKind::coexisting)
        throw std::invalid_argument("coexisting_stability: wrong equilibrium kind");
    const Rates a = Rates::from(params);
    const Mat5 J = state_jacobian(eq.point, ControlPoint{}, a);

    const double tr = J[0][0] + J[1][1] + J[2][2];
    const double minors = J[0][0] * J[1][1] - J[0][1] * J[1][0] +
                          J[0][0] * J[2][2] - J[0][2] * J[2][0] +
                          J[1][1] * J[2][2] - J[1][2] * J[2][1];
    const double det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                       J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                       J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);

    StabilityReport rep;
    rep.cubic_c1 = -tr;
    rep.cubic_c2 = minors;
    rep.cubic_c3 = -det;
    const double c1 = rep.cubic_c1, c2 = rep.cubic_c2, c3 = rep.cubic_c3;
    rep.discriminant = 18.0 * c1 * c2 * c3 + c1 * c1 * c2 * c2 -
                       4.0 * c3 * c1 * c1 * c1 - 4.0 * c2 * c2 * c2 - 27.0 * c3 * c3;

    rep.eigenvalues = detail::numeric_eigenvalues(eq.point, a);
    rep.matignon_margin = detail::matignon_margin(rep.eigenvalues, params.alpha);
    rep.verdict = detail::verdict_from_margin(rep.matignon_margin);

    const double D = rep.discriminant;
    rep.conditions["branch_i"] = D > 0.0 && c1 > 0.0 && c3 > 0.0 && c1 * c2 > c3;
    rep.conditions["branch_ii"] =
        D < 0.0 && c1 >= 0.0 && c2 >= 0.0 && c3 > 0.0 && params.alpha < 2.0 / 3.0;
    rep.conditions["branch_iii"] = D < 0.0 && c1 > 0.0 && c2 > 0.0 && c1 * c2 == c3;
    rep.conditions["analytic_stable"] = rep.conditions["branch_i"] ||
                                        rep.conditions["branch_ii"] ||
                                        rep.conditions["branch_iii"];
    return rep;
}

}  // namespace ftoc

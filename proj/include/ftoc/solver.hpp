#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftoc/l1.hpp"
#include "ftoc/linalg.hpp"
#include "ftoc/model.hpp"

namespace ftoc {

struct Grid {
    double tf;      // final time (days)
    double dt;      // step (days)
    std::size_t n;  // step count, n*dt = tf

    static Grid make(double tf, double dt) {
        if (!(tf > 0.0) || !(dt > 0.0))
            throw std::invalid_argument("grid: tf and dt must be positive");
        const auto n = static_cast<std::size_t>(std::llround(tf / dt));
        if (n < 2 || std::abs(double(n) * dt - tf) > 1e-9 * tf)
            throw std::invalid_argument("grid: tf must be a multiple of dt with n >= 2");
        return {tf, dt, n};
    }

    double time(std::size_t k) const { return double(k) * dt; }
};

struct StateTrajectory {
    Grid grid;
    std::vector<StatePoint> points;  // length n+1
};

struct AdjointTrajectory {
    Grid grid;
    std::vector<AdjointPoint> points;  // length n+1, points[n] = 0
};

struct ControlSchedule {
    Grid grid;
    std::vector<ControlPoint> points;  // length n+1, each in [0,1]^2

    static ControlSchedule constant(const Grid& g, double u1, double u2) {
        return {g, std::vector<ControlPoint>(g.n + 1, {u1, u2})};
    }
};

struct NewtonConfig {
    std::size_t max_iter = 25;
    double tol = 1e-10;    // residual max-norm, relative to the step's term scale
    double damping = 0.5;  // backtracking shrink factor
};

struct NonConvergence : std::runtime_error {
    std::size_t step;
    double residual;
    NonConvergence(std::size_t k, double res)
        : std::runtime_error("Newton failed to converge at step " + std::to_string(k) +
                             " (residual " + std::to_string(res) + ")"),
          step(k), residual(res) {}
};

namespace detail {

inline double max_abs(const Vec5& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// History sums of the left L1 operator at step k, per component, from the
// already-computed trajectory points 0..k-1.
inline Vec5 left_history(const std::vector<StatePoint>& pts, const L1Stencil& st,
                         std::size_t k) {
    Vec5 hist{};
    const auto& w = st.weights;
    for (int c = 0; c < 5; ++c) hist[c] = -pts[0].to_vec()[c] * w[k - 1];
    for (std::size_t j = 1; j < k; ++j) {
        const double dw = w[k - j] - w[k - j - 1];
        const Vec5 v = pts[j].to_vec();
        for (int c = 0; c < 5; ++c) hist[c] += v[c] * dw;
    }
    for (int c = 0; c < 5; ++c) hist[c] *= st.b0;
    return hist;
}

// Residual of the implicit L1 step: diag*x_k + history - f(x_k, u_k).
inline Vec5 step_residual(const Vec5& xk, const Vec5& hist, double diag,
                          const ControlPoint& u, const Rates& a) {
    const Vec5 f = state_rhs(StatePoint::from_vec(xk), u, a);
    Vec5 r;
    for (int c = 0; c < 5; ++c) r[c] = diag * xk[c] + hist[c] - f[c];
    return r;
}

}  // namespace detail

// Implicit L1 time stepping of the state system, one damped Newton solve per
// step. The initial guess at step k is the previous step's solution.
inline StateTrajectory solve_state(const ModelParams& params,
                                   const ControlSchedule& controls,
                                   const StatePoint& x0, const Grid& grid,
                                   const NewtonConfig& cfg = {}) {
    if (controls.points.size() != grid.n + 1)
        throw std::invalid_argument("solve_state: controls not sampled on the grid");
    const Rates a = Rates::from(params);
    const L1Stencil st = build_stencil(params.alpha, grid.dt, grid.n);
    const double diag = st.diag();

    StateTrajectory traj{grid, {}};
    traj.points.reserve(grid.n + 1);
    traj.points.push_back(x0);

    for (std::size_t k = 1; k <= grid.n; ++k) {
        const Vec5 hist = detail::left_history(traj.points, st, k);
        const ControlPoint& u = controls.points[k];
        Vec5 x = traj.points[k - 1].to_vec();
        Vec5 res = detail::step_residual(x, hist, diag, u, a);
        double rnorm = detail::max_abs(res);
        // Roundoff floors the residual near diag*|x|*eps, so judge it
        // against the size of the terms that formed it.
        auto scale = [&](const Vec5& xk) {
            double s = 1.0;
            for (int c = 0; c < 5; ++c)
                s = std::max(s, std::abs(diag * xk[c]) + std::abs(hist[c]));
            return s;
        };
        bool ok = rnorm <= cfg.tol * scale(x);
        for (std::size_t it = 0; it < cfg.max_iter && !ok; ++it) {
            Mat5 A = state_jacobian(StatePoint::from_vec(x), u, a);
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) A[i][j] = (i == j ? diag : 0.0) - A[i][j];
            Vec5 rhs;
            for (int c = 0; c < 5; ++c) rhs[c] = -res[c];
            const Vec5 dx = solve5(A, rhs, k);
            double step_scale = 1.0;
            for (;;) {
                Vec5 trial;
                for (int c = 0; c < 5; ++c) trial[c] = x[c] + step_scale * dx[c];
                const Vec5 tres = detail::step_residual(trial, hist, diag, u, a);
                const double tnorm = detail::max_abs(tres);
                if (tnorm < rnorm || step_scale < 1e-6) {
                    x = trial;
                    res = tres;
                    rnorm = tnorm;
                    break;
                }
                step_scale *= cfg.damping;
            }
            ok = rnorm <= cfg.tol * scale(x);
        }
        if (!ok) throw NonConvergence(k, rnorm);
        traj.points.push_back(StatePoint::from_vec(x));
    }
    return traj;
}

namespace detail {

// Future-history sums of the right L1 operator at t_k, per component, from the
// adjoint points k+1..n.
inline Vec5 right_history(const std::vector<AdjointPoint>& pts, const L1Stencil& st,
                          std::size_t k, std::size_t n) {
    Vec5 hist{};
    const auto& w = st.weights;
    const Vec5 vn = pts[n].to_vec();
    for (int c = 0; c < 5; ++c) hist[c] = vn[c] * w[n - k - 1];
    for (std::size_t j = k + 1; j < n; ++j) {
        const double dw = w[j - k - 1] - w[j - k];
        const Vec5 v = pts[j].to_vec();
        for (int c = 0; c < 5; ++c) hist[c] += v[c] * dw;
    }
    const double c0 = -st.b0;
    for (int c = 0; c < 5; ++c) hist[c] *= c0;
    return hist;
}

}  // namespace detail

// Backward solve of the linear adjoint system against the given state
// trajectory. The terminal point is pinned to zero; each earlier point solves
// one 5x5 system (diag*I - J^T) lambda_k = forcing - history.
//
// cost_grad is the running-cost gradient forcing (default: d/dx of
// T + w1 u1^2 + w2 u2^2, i.e. the unit vector on the tumor row).
inline AdjointTrajectory solve_adjoint(const ModelParams& params,
                                       const StateTrajectory& states,
                                       const Grid& grid,
                                       const Vec5& cost_grad = {1, 0, 0, 0, 0}) {
    if (states.points.size() != grid.n + 1)
        throw std::invalid_argument("solve_adjoint: states not sampled on the grid");
    const Rates a = Rates::from(params);
    const L1Stencil st = build_stencil(params.alpha, grid.dt, grid.n);
    const double diag = st.diag();

    AdjointTrajectory traj{grid, std::vector<AdjointPoint>(grid.n + 1)};
    for (std::size_t k = grid.n; k-- > 0;) {
        const Vec5 hist = detail::right_history(traj.points, st, k, grid.n);
        Mat5 A = state_jacobian(states.points[k], {}, a);
        Mat5 M{};
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) M[i][j] = (i == j ? diag : 0.0) - A[j][i];
        Vec5 rhs;
        for (int c = 0; c < 5; ++c) rhs[c] = cost_grad[c] - hist[c];
        traj.points[k] = AdjointPoint::from_vec(solve5(M, rhs, k));
    }
    return traj;
}

}  // namespace ftoc

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ftoc/model.hpp"
#include "ftoc/solver.hpp"

namespace ftoc {

enum class Scenario { uncontrolled, immunotherapy, chemotherapy, combined };

// Which control channels the sweep may move; masked channels stay pinned at 0.
inline bool u1_active(Scenario s) {
    return s == Scenario::chemotherapy || s == Scenario::combined;
}
inline bool u2_active(Scenario s) {
    return s == Scenario::immunotherapy || s == Scenario::combined;
}

inline ControlSchedule scenario_controls(Scenario kind, ControlSchedule schedule) {
    for (auto& u : schedule.points) {
        if (!u1_active(kind)) u.u1 = 0.0;
        if (!u2_active(kind)) u.u2 = 0.0;
    }
    return schedule;
}

struct SweepConfig {
    double delta = 0.001;        // relative-convergence constant
    std::size_t max_sweeps = 500;
    double relaxation = 0.5;     // blend weight for the projected controls
    // Near the containment boundary the half-blend map can settle into a
    // period-2 cycle; whenever psi degrades, the blend weight backs off by
    // this factor (never below min_relaxation) until the map contracts.
    double relaxation_backoff = 0.7;
    double min_relaxation = 0.02;
    Scenario scenario = Scenario::combined;
};

struct OptimalSolution {
    ControlSchedule controls;
    StateTrajectory states;
    AdjointTrajectory adjoints;
    double cost = 0.0;
    std::size_t sweeps_used = 0;
    double psi_final = 0.0;
    bool converged = false;
};

// Pointwise projection of the stationarity condition onto [0,1]^2.
inline ControlSchedule project_controls(const AdjointTrajectory& adjoints,
                                        const ModelParams& params) {
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    ControlSchedule out{adjoints.grid, {}};
    out.points.reserve(adjoints.points.size());
    for (const auto& l : adjoints.points)
        out.points.push_back({clamp01(-l.l4 / (2.0 * params.omega1)),
                              clamp01(-l.l5 / (2.0 * params.omega2))});
    return out;
}

// Composite-trapezoid quadrature of the running cost over [0, tf].
inline double evaluate_cost(const StateTrajectory& states,
                            const ControlSchedule& controls,
                            const ModelParams& params) {
    const std::size_t n = states.grid.n;
    if (controls.points.size() != n + 1)
        throw std::invalid_argument("evaluate_cost: mismatched grids");
    double acc = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double f = cost_integrand(states.points[k], controls.points[k], params);
        acc += (k == 0 || k == n) ? 0.5 * f : f;
    }
    return acc * states.grid.dt;
}

namespace detail {

// delta*||new|| - ||new - old||, discrete 1-norm over the grid.
inline double convergence_term(double delta, const std::vector<double>& now,
                               const std::vector<double>& old) {
    double norm = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < now.size(); ++i) {
        norm += std::abs(now[i]);
        diff += std::abs(now[i] - old[i]);
    }
    return delta * norm - diff;
}

template <typename P>
std::vector<double> component(const std::vector<P>& pts, int c) {
    std::vector<double> v(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) v[i] = pts[i].to_vec()[c];
    return v;
}

inline std::vector<double> control_component(const std::vector<ControlPoint>& pts,
                                             int c) {
    std::vector<double> v(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) v[i] = c == 0 ? pts[i].u1 : pts[i].u2;
    return v;
}

}  // namespace detail

// Projected forward-backward sweep: alternate state and adjoint solves, blend
// the projected controls with the previous iterate, and stop once every
// state, control, and adjoint component satisfies the relative-change
// criterion (psi >= 0).
inline OptimalSolution forward_backward_sweep(const ModelParams& params,
                                              const StatePoint& x0,
                                              const ControlSchedule& u_init,
                                              const Grid& grid,
                                              const SweepConfig& cfg = {},
                                              const NewtonConfig& newton_cfg = {}) {
    params.validate();
    ControlSchedule u = scenario_controls(cfg.scenario, u_init);
    StateTrajectory x_old{grid, std::vector<StatePoint>(grid.n + 1)};
    AdjointTrajectory l_old{grid, std::vector<AdjointPoint>(grid.n + 1)};

    OptimalSolution sol;
    double psi = -1.0;
    double psi_prev = -std::numeric_limits<double>::infinity();
    double relax = cfg.relaxation;
    std::size_t sweep = 0;
    StateTrajectory x = x_old;
    AdjointTrajectory l = l_old;
    while (psi < 0.0 && sweep < cfg.max_sweeps) {
        ++sweep;
        x = solve_state(params, u, x0, grid, newton_cfg);
        l = solve_adjoint(params, x, grid);
        ControlSchedule proj = project_controls(l, params);
        ControlSchedule u_new{grid, u.points};
        for (std::size_t k = 0; k <= grid.n; ++k) {
            if (u1_active(cfg.scenario))
                u_new.points[k].u1 = relax * proj.points[k].u1 +
                                     (1.0 - relax) * u.points[k].u1;
            if (u2_active(cfg.scenario))
                u_new.points[k].u2 = relax * proj.points[k].u2 +
                                     (1.0 - relax) * u.points[k].u2;
        }

        psi = std::numeric_limits<double>::infinity();
        for (int c = 0; c < 5; ++c) {
            psi = std::min(psi, detail::convergence_term(
                                    cfg.delta, detail::component(x.points, c),
                                    detail::component(x_old.points, c)));
            psi = std::min(psi, detail::convergence_term(
                                    cfg.delta, detail::component(l.points, c),
                                    detail::component(l_old.points, c)));
        }
        for (int c = 0; c < 2; ++c)
            psi = std::min(psi, detail::convergence_term(
                                    cfg.delta,
                                    detail::control_component(u_new.points, c),
                                    detail::control_component(u.points, c)));
        if (psi < psi_prev)
            relax = std::max(cfg.min_relaxation, relax * cfg.relaxation_backoff);
        psi_prev = psi;
        x_old = x;
        l_old = l;
        u = std::move(u_new);
    }

    // Re-solve with the final controls so the returned triple is consistent.
    sol.states = solve_state(params, u, x0, grid, newton_cfg);
    sol.adjoints = solve_adjoint(params, sol.states, grid);
    sol.controls = std::move(u);
    sol.cost = evaluate_cost(sol.states, sol.controls, params);
    sol.sweeps_used = sweep;
    sol.psi_final = psi;
    sol.converged = psi >= 0.0;
    return sol;
}

}  // namespace ftoc

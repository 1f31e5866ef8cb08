#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ftoc/sweep.hpp"

using namespace ftoc;

namespace {

ModelParams fixture_params() {
    ModelParams m;
    m.alpha = 0.9;
    m.c1 = 0.035;
    m.c2 = 2.3e-4;
    return m;
}

const StatePoint kX0{2.0, 0.1, 1.0, 0.5, 0.5};

}  // namespace

TEST_CASE("scenario channel masks") {
    CHECK_FALSE(u1_active(Scenario::uncontrolled));
    CHECK_FALSE(u2_active(Scenario::uncontrolled));
    CHECK_FALSE(u1_active(Scenario::immunotherapy));
    CHECK(u2_active(Scenario::immunotherapy));
    CHECK(u1_active(Scenario::chemotherapy));
    CHECK_FALSE(u2_active(Scenario::chemotherapy));
    CHECK(u1_active(Scenario::combined));
    CHECK(u2_active(Scenario::combined));

    const Grid g = Grid::make(1.0, 0.25);
    const auto masked =
        scenario_controls(Scenario::immunotherapy, ControlSchedule::constant(g, 0.7, 0.4));
    for (const auto& u : masked.points) {
        CHECK(u.u1 == 0.0);
        CHECK(u.u2 == 0.4);
    }
}

TEST_CASE("control projection clamps the stationarity map to [0,1]") {
    const ModelParams m = fixture_params();  // omega1 = 1, omega2 = 2
    const Grid g = Grid::make(1.0, 0.25);
    AdjointTrajectory l{g, std::vector<AdjointPoint>(g.n + 1)};
    l.points[0] = {0, 0, 0, -1.0, -1.0};   // interior: u1 = 0.5, u2 = 0.25
    l.points[1] = {0, 0, 0, -4.0, -10.0};  // saturates high
    l.points[2] = {0, 0, 0, 2.0, 5.0};     // saturates low
    l.points[3] = {0, 0, 0, 0.0, 0.0};     // zero multiplier
    const auto u = project_controls(l, m);
    CHECK(u.points[0].u1 == Catch::Approx(0.5));
    CHECK(u.points[0].u2 == Catch::Approx(0.25));
    CHECK(u.points[1].u1 == 1.0);
    CHECK(u.points[1].u2 == 1.0);
    CHECK(u.points[2].u1 == 0.0);
    CHECK(u.points[2].u2 == 0.0);
    CHECK(u.points[3].u1 == 0.0);
    CHECK(u.points[3].u2 == 0.0);
}

TEST_CASE("trapezoid cost on constant data") {
    const ModelParams m = fixture_params();
    const Grid g = Grid::make(10.0, 0.5);
    StateTrajectory x{g, std::vector<StatePoint>(g.n + 1, {2.0, 0, 0, 0, 0})};
    const auto u = ControlSchedule::constant(g, 0.5, 0.5);
    const double expect = 10.0 * (2.0 + 0.25 * (m.omega1 + m.omega2));
    CHECK(evaluate_cost(x, u, m) == Catch::Approx(expect).epsilon(1e-13));

    ControlSchedule bad = u;
    bad.points.pop_back();
    CHECK_THROWS_AS(evaluate_cost(x, bad, m), std::invalid_argument);
}

TEST_CASE("trapezoid cost integrates a linear ramp exactly") {
    const ModelParams m = fixture_params();
    const Grid g = Grid::make(4.0, 0.25);
    StateTrajectory x{g, std::vector<StatePoint>(g.n + 1)};
    for (std::size_t k = 0; k <= g.n; ++k) x.points[k].T = 3.0 * g.time(k);
    const auto u = ControlSchedule::constant(g, 0.0, 0.0);
    CHECK(evaluate_cost(x, u, m) == Catch::Approx(3.0 * 0.5 * 16.0).epsilon(1e-13));
}

TEST_CASE("convergence term matches the relative-change criterion") {
    const double psi_equal = detail::convergence_term(0.001, {1.0, 2.0}, {1.0, 2.0});
    CHECK(psi_equal == Catch::Approx(0.003));
    const double psi_far = detail::convergence_term(0.001, {1.0, 2.0}, {0.0, 0.0});
    CHECK(psi_far < 0.0);
}

TEST_CASE("sweep converges on a short combined-therapy horizon") {
    const ModelParams m = fixture_params();
    const Grid grid = Grid::make(20.0, 0.25);
    SweepConfig cfg;
    cfg.scenario = Scenario::combined;
    const auto sol = forward_backward_sweep(
        m, kX0, ControlSchedule::constant(grid, 0.5, 0.5), grid, cfg);
    CHECK(sol.converged);
    CHECK(sol.psi_final >= 0.0);
    CHECK(sol.sweeps_used >= 2);
    CHECK(sol.cost > 0.0);

    for (const auto& u : sol.controls.points) {
        CHECK(u.u1 >= 0.0);
        CHECK(u.u1 <= 1.0);
        CHECK(u.u2 >= 0.0);
        CHECK(u.u2 <= 1.0);
    }
    // Terminal multipliers vanish, so the projected terminal dose is zero.
    CHECK(sol.controls.points[grid.n].u1 == Catch::Approx(0.0).margin(1e-6));
    CHECK(sol.controls.points[grid.n].u2 == Catch::Approx(0.0).margin(1e-6));

    // At the fixed point the controls satisfy the projected stationarity map
    // of their own adjoints, up to the sweep tolerance.
    const auto proj = project_controls(sol.adjoints, m);
    double worst = 0.0;
    for (std::size_t k = 0; k <= grid.n; ++k) {
        worst = std::max(worst, std::abs(sol.controls.points[k].u1 - proj.points[k].u1));
        worst = std::max(worst, std::abs(sol.controls.points[k].u2 - proj.points[k].u2));
    }
    CHECK(worst < 5e-3);
}

TEST_CASE("sweep beats constant dosing strategies") {
    const ModelParams m = fixture_params();
    const Grid grid = Grid::make(20.0, 0.25);
    SweepConfig cfg;
    cfg.scenario = Scenario::combined;
    const auto sol = forward_backward_sweep(
        m, kX0, ControlSchedule::constant(grid, 0.5, 0.5), grid, cfg);

    for (double c : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto u = ControlSchedule::constant(grid, c, c);
        const auto x = solve_state(m, u, kX0, grid);
        CHECK(sol.cost <= evaluate_cost(x, u, m) + 1e-6);
    }
}

TEST_CASE("masked channels stay pinned through the sweep") {
    const ModelParams m = fixture_params();
    const Grid grid = Grid::make(10.0, 0.25);
    SweepConfig cfg;
    cfg.scenario = Scenario::chemotherapy;
    const auto sol = forward_backward_sweep(
        m, kX0, ControlSchedule::constant(grid, 0.5, 0.5), grid, cfg);
    CHECK(sol.converged);
    for (const auto& u : sol.controls.points) CHECK(u.u2 == 0.0);

    cfg.scenario = Scenario::immunotherapy;
    const auto sol2 = forward_backward_sweep(
        m, kX0, ControlSchedule::constant(grid, 0.5, 0.5), grid, cfg);
    CHECK(sol2.converged);
    for (const auto& u : sol2.controls.points) CHECK(u.u1 == 0.0);
}

TEST_CASE("sweep result is insensitive to the initial dose guess") {
    const ModelParams m = fixture_params();
    const Grid grid = Grid::make(10.0, 0.25);
    SweepConfig cfg;
    cfg.scenario = Scenario::combined;
    const auto a = forward_backward_sweep(
        m, kX0, ControlSchedule::constant(grid, 0.1, 0.1), grid, cfg);
    const auto b = forward_backward_sweep(
        m, kX0, ControlSchedule::constant(grid, 0.9, 0.9), grid, cfg);
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(a.cost == Catch::Approx(b.cost).epsilon(5e-3));
}

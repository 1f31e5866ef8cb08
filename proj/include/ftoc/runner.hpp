#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ftoc/config.hpp"
#include "ftoc/equilibria.hpp"
#include "ftoc/model.hpp"
#include "ftoc/solver.hpp"
#include "ftoc/sweep.hpp"

namespace ftoc {

struct SweepCell {
    double alpha = 0.0;
    double gamma1 = 0.0;
    Scenario scenario = Scenario::combined;
    double cost = 0.0;
    std::size_t sweeps_used = 0;
    bool converged = false;
    bool failed = false;
    std::string error;
    std::string trajectory_file;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    bool all_ok() const {
        for (const auto& c : cells)
            if (c.failed || !c.converged) return false;
        return true;
    }
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Short form for human-facing labels (axis values, file names).
inline std::string fmtg(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace detail

inline void emit_trajectory_csv(const OptimalSolution& sol, const std::string& path) {
    std::string out = "t,T,I,F,D1,D2,u1,u2,lambda1,lambda2,lambda3,lambda4,lambda5\n";
    const Grid& g = sol.states.grid;
    for (std::size_t k = 0; k <= g.n; ++k) {
        const StatePoint& x = sol.states.points[k];
        const ControlPoint& u = sol.controls.points[k];
        const AdjointPoint& l = sol.adjoints.points[k];
        using detail::fmt17;
        out += fmt17(g.time(k));
        for (double v : {x.T, x.I, x.F, x.D1, x.D2, u.u1, u.u2, l.l1, l.l2, l.l3,
                         l.l4, l.l5})
            out += "," + fmt17(v);
        out += "\n";
    }
    detail::write_file(path, out);
}

// Runs one sweep cell: a plain forward solve for the uncontrolled scenario,
// the full forward-backward sweep otherwise.
inline OptimalSolution run_cell(const RunConfig& cfg, double alpha, double gamma1) {
    ModelParams params = cfg.params;
    params.alpha = alpha;
    params.gamma1 = gamma1;
    const Grid grid = Grid::make(cfg.tf, cfg.dt);
    if (cfg.scenario == Scenario::uncontrolled) {
        OptimalSolution sol;
        sol.controls = ControlSchedule::constant(grid, 0.0, 0.0);
        sol.states = solve_state(params, sol.controls, cfg.x0, grid, cfg.newton);
        sol.adjoints = solve_adjoint(params, sol.states, grid);
        sol.cost = evaluate_cost(sol.states, sol.controls, params);
        sol.converged = true;
        return sol;
    }
    SweepConfig sweep = cfg.sweep;
    ControlSchedule u0 = ControlSchedule::constant(grid, cfg.u_init, cfg.u_init);
    return forward_backward_sweep(params, cfg.x0, u0, grid, sweep, cfg.newton);
}

inline std::string cell_file_name(double alpha, double gamma1) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "cell_%g_%g.csv", alpha, gamma1);
    return buf;
}

// Runs every (alpha, gamma1) cell, writes one trajectory CSV per cell plus the
// aggregate cost table. Cell failures are recorded, never propagated.
inline SweepResult run_sweep(const RunConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    std::vector<std::pair<double, double>> cells;
    if (cfg.scenario == Scenario::uncontrolled) {
        for (double a : cfg.alpha_list) cells.emplace_back(a, cfg.gamma1_list.front());
    } else {
        for (double a : cfg.alpha_list)
            for (double g : cfg.gamma1_list) cells.emplace_back(a, g);
    }

    SweepResult result;
    result.cells.resize(cells.size());
    auto work = [&](std::size_t i) {
        SweepCell& cell = result.cells[i];
        cell.alpha = cells[i].first;
        cell.gamma1 = cells[i].second;
        cell.scenario = cfg.scenario;
        try {
            const OptimalSolution sol = run_cell(cfg, cell.alpha, cell.gamma1);
            cell.cost = sol.cost;
            cell.sweeps_used = sol.sweeps_used;
            cell.converged = sol.converged;
            cell.trajectory_file = cell_file_name(cell.alpha, cell.gamma1);
            emit_trajectory_csv(sol, (fs::path(cfg.output_dir) / cell.trajectory_file)
                                         .string());
        } catch (const std::exception& e) {
            cell.failed = true;
            cell.error = e.what();
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(std::max(cfg.workers, 1), cells.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < cells.size(); i = next++) work(i);
            });
        for (auto& t : pool) t.join();
    }

    // Aggregate table: rows alpha, columns gamma1.
    std::string table = "alpha";
    if (cfg.scenario == Scenario::uncontrolled) {
        table += ",J\n";
        for (const auto& c : result.cells)
            table += detail::fmtg(c.alpha) + "," +
                     (c.failed ? std::string("error") : detail::fmt17(c.cost)) + "\n";
    } else {
        for (double g : cfg.gamma1_list) table += ",J_gamma1=" + detail::fmtg(g);
        table += "\n";
        std::size_t i = 0;
        for (double a : cfg.alpha_list) {
            table += detail::fmtg(a);
            for (std::size_t j = 0; j < cfg.gamma1_list.size(); ++j, ++i)
                table += "," + (result.cells[i].failed
                                    ? std::string("error")
                                    : detail::fmt17(result.cells[i].cost));
            table += "\n";
        }
    }
    detail::write_file((fs::path(cfg.output_dir) / "table.csv").string(), table);
    return result;
}

// Structured text report of the equilibrium analysis at constant doses.
inline void emit_equilibrium_report(const ModelParams& params, double u1, double u2,
                                    const std::string& path) {
    using detail::fmt17;
    std::string out;
    out += "equilibrium report (u1 = " + fmt17(u1) + ", u2 = " + fmt17(u2) +
           ", alpha = " + fmt17(params.alpha) + ")\n\n";

    out += "[tumor-free]\n";
    const auto ex = tumor_free_existence(params, u1, u2);
    out += "existence margin (immune denominator): " + fmt17(ex.immune_positive.margin) +
           "\n";
    out += "existence margin (fat positivity):     " + fmt17(ex.fat_positive.margin) +
           "\n";
    try {
        const auto eq = tumor_free_equilibrium(params, u1, u2);
        out += "point: T=0 I=" + fmt17(eq.point.I) + " F=" + fmt17(eq.point.F) +
               " D1=" + fmt17(eq.point.D1) + " D2=" + fmt17(eq.point.D2) + "\n";
        out += "residual: " + fmt17(eq.residual) + "\n";
        const auto rep = tumor_free_stability(params, u1, u2);
        out += "eigenvalues:";
        for (const auto& l : rep.eigenvalues)
            out += " (" + fmt17(l.real()) + (l.imag() >= 0 ? "+" : "") +
                   fmt17(l.imag()) + "i)";
        out += "\n";
        out += "matignon margin: " + fmt17(rep.matignon_margin) + "\n";
        out += std::string("verdict: ") +
               (rep.verdict == Verdict::stable
                    ? "stable"
                    : rep.verdict == Verdict::unstable ? "unstable" : "marginal") +
               "\n";
        for (const auto& [name, value] : rep.conditions)
            out += "condition " + name + ": " + (value ? "true" : "false") + "\n";
    } catch (const NonexistentEquilibrium& e) {
        out += std::string("nonexistent: ") + e.what() + "\n";
    }

    out += "\n[coexisting]\n";
    const auto an = coexisting_analysis(params, u1, u2);
    out += "quartic m0..m4:";
    for (double m : an.m) out += " " + fmt17(m);
    out += "\n";
    out += "descartes case: " + std::to_string(an.descartes_case) +
           (an.descartes_case == 1 ? " (no coexisting equilibrium)" : "") + "\n";
    out += "real roots:";
    for (double r : an.real_roots) out += " " + fmt17(r);
    out += "\n";
    out += "candidates: " + std::to_string(an.candidates.size()) + "\n";
    int idx = 0;
    for (const auto& eq : an.candidates) {
        ++idx;
        out += "candidate " + std::to_string(idx) + ": T=" + fmt17(eq.point.T) +
               " I=" + fmt17(eq.point.I) + " F=" + fmt17(eq.point.F) +
               " D1=" + fmt17(eq.point.D1) + " D2=" + fmt17(eq.point.D2) +
               " residual=" + fmt17(eq.residual) + "\n";
        const auto rep = coexisting_stability(eq, params);
        out += "  cubic c1=" + fmt17(rep.cubic_c1) + " c2=" + fmt17(rep.cubic_c2) +
               " c3=" + fmt17(rep.cubic_c3) + " D(q)=" + fmt17(rep.discriminant) + "\n";
        out += "  eigenvalues:";
        for (const auto& l : rep.eigenvalues)
            out += " (" + fmt17(l.real()) + (l.imag() >= 0 ? "+" : "") +
                   fmt17(l.imag()) + "i)";
        out += "\n";
        out += "  matignon margin: " + fmt17(rep.matignon_margin) + "\n";
        out += std::string("  verdict: ") +
               (rep.verdict == Verdict::stable
                    ? "stable"
                    : rep.verdict == Verdict::unstable ? "unstable" : "marginal") +
               "\n";
        for (const auto& [name, value] : rep.conditions)
            out += "  condition " + name + ": " + (value ? "true" : "false") + "\n";
    }
    detail::write_file(path, out);
}

}  // namespace ftoc

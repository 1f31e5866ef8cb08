// Batch front-end: scenario sweeps, trajectory CSVs, cost tables, and
// equilibrium/stability reports.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "ftoc/config.hpp"
#include "ftoc/runner.hpp"

namespace {

constexpr const char* kVersion = "ftoc 1.0.0";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void warn_c1c2(const ftoc::RunConfig& cfg) {
    if (!cfg.c1c2_explicit)
        std::cerr << "warning: c1/c2 (fat-cell coupling) not set in the config; "
                     "using the calibrated repo defaults c1 = "
                  << cfg.params.c1 << ", c2 = " << cfg.params.c2
                  << " (no measured value exists)\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional optimal control of a tumor-immune-fat model"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, scenario, alphas, gamma1s, out_dir;
    double tf = -1.0, dt = -1.0, u1 = -1.0, u2 = -1.0;
    int workers = -1;

    auto* run = app.add_subcommand("run", "run scenario sweeps");
    run->add_option("--config", config_path, "config file (key = value lines)");
    run->add_option("--scenario", scenario, "none|immuno|chemo|combined");
    run->add_option("--alpha", alphas, "comma-separated fractional orders");
    run->add_option("--gamma1", gamma1s, "comma-separated D1 decay rates");
    run->add_option("--tf", tf, "final time (days)");
    run->add_option("--dt", dt, "time step (days)");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--workers", workers, "concurrent sweep cells");

    auto* eq = app.add_subcommand("equilibria", "equilibrium and stability report");
    eq->add_option("--config", config_path, "config file (key = value lines)");
    eq->add_option("--u1", u1, "constant chemo dose")->required();
    eq->add_option("--u2", u2, "constant immuno dose")->required();
    eq->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    ftoc::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = ftoc::parse_config(read_file(config_path));
        if (!scenario.empty()) cfg.scenario = ftoc::scenario_from_name(scenario);
        if (!alphas.empty()) cfg.alpha_list = ftoc::detail::parse_list(alphas, 0);
        if (!gamma1s.empty()) cfg.gamma1_list = ftoc::detail::parse_list(gamma1s, 0);
        if (tf > 0.0) cfg.tf = tf;
        if (dt > 0.0) cfg.dt = dt;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (workers > 0) cfg.workers = workers;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    warn_c1c2(cfg);

    try {
        if (run->parsed()) {
            const ftoc::SweepResult result = ftoc::run_sweep(cfg);
            bool any_failed = false;
            for (const auto& cell : result.cells) {
                std::cout << "cell alpha=" << cell.alpha << " gamma1=" << cell.gamma1
                          << " scenario=" << ftoc::scenario_name(cell.scenario);
                if (cell.failed) {
                    std::cout << " FAILED: " << cell.error << "\n";
                    any_failed = true;
                } else {
                    std::cout << " J=" << cell.cost << " sweeps=" << cell.sweeps_used
                              << (cell.converged ? "" : " (not converged)") << "\n";
                    if (!cell.converged) any_failed = true;
                }
            }
            std::cout << "outputs written to " << cfg.output_dir << "\n";
            return any_failed ? 2 : 0;
        }
        // equilibria
        ftoc::ModelParams params = cfg.params;
        params.alpha = cfg.alpha_list.front();
        params.gamma1 = cfg.gamma1_list.front();
        std::filesystem::create_directories(cfg.output_dir);
        const std::string path =
            (std::filesystem::path(cfg.output_dir) / "report.txt").string();
        ftoc::emit_equilibrium_report(params, u1, u2, path);
        std::cout << "report written to " << path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

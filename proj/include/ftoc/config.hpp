#pragma once

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftoc/model.hpp"
#include "ftoc/solver.hpp"
#include "ftoc/sweep.hpp"

namespace ftoc {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ModelParams params;
    Scenario scenario = Scenario::combined;
    std::vector<double> alpha_list{0.9};
    std::vector<double> gamma1_list{0.1};
    double tf = 120.0;
    double dt = 0.25;
    StatePoint x0{2.0, 0.1, 1.0, 0.5, 0.5};
    double u_init = 0.5;  // initial dose guess on active channels
    SweepConfig sweep;
    NewtonConfig newton;
    std::string output_dir = "out";
    int workers = 1;
    bool c1c2_explicit = false;  // whether c1/c2 came from the config
    double u1 = 0.0, u2 = 0.0;   // constant doses for equilibrium reports

    void validate() const {
        if (alpha_list.empty()) throw ValidationError("alpha list must be non-empty");
        if (gamma1_list.empty()) throw ValidationError("gamma1 list must be non-empty");
        for (double a : alpha_list)
            if (!(a > 0.0 && a < 1.0))
                throw ValidationError("alpha must lie in (0,1)");
        for (double g : gamma1_list)
            if (!(g > 0.0)) throw ValidationError("gamma1 must be positive");
        if (!(tf > 0.0) || !(dt > 0.0) || tf < 2.0 * dt)
            throw ValidationError("grid requires tf > 0, dt > 0, tf >= 2*dt");
        if (workers < 1) throw ValidationError("workers must be at least 1");
        ModelParams check = params;
        check.alpha = alpha_list.front();
        check.gamma1 = gamma1_list.front();
        check.validate();
    }
};

inline std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::uncontrolled: return "none";
        case Scenario::immunotherapy: return "immuno";
        case Scenario::chemotherapy: return "chemo";
        case Scenario::combined: return "combined";
    }
    return "combined";
}

inline Scenario scenario_from_name(const std::string& name) {
    if (name == "none" || name == "uncontrolled") return Scenario::uncontrolled;
    if (name == "immuno" || name == "immunotherapy") return Scenario::immunotherapy;
    if (name == "chemo" || name == "chemotherapy") return Scenario::chemotherapy;
    if (name == "combined") return Scenario::combined;
    throw ValidationError("unknown scenario '" + name +
                          "' (expected none|immuno|chemo|combined)");
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line) + ": expected a number, got '" +
                         v + "'");
    }
}

inline std::vector<double> parse_list(const std::string& v, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item), line));
    if (out.empty()) throw ParseError("line " + std::to_string(line) + ": empty list");
    return out;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    return out;
}

}  // namespace detail

// Flat key = value document; '#' starts a comment. Omitted keys keep their
// defaults.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string stripped = detail::trim(raw);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string val = detail::trim(stripped.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ParseError("line " + std::to_string(line) + ": empty key or value");

        auto num = [&] { return detail::parse_number(val, line); };
        if (key == "alpha" || key == "alpha_list") cfg.alpha_list = detail::parse_list(val, line);
        else if (key == "gamma1" || key == "gamma1_list") cfg.gamma1_list = detail::parse_list(val, line);
        else if (key == "scenario") cfg.scenario = scenario_from_name(val);
        else if (key == "tf") cfg.tf = num();
        else if (key == "dt") cfg.dt = num();
        else if (key == "T0") cfg.x0.T = num();
        else if (key == "I0") cfg.x0.I = num();
        else if (key == "F0") cfg.x0.F = num();
        else if (key == "D10") cfg.x0.D1 = num();
        else if (key == "D20") cfg.x0.D2 = num();
        else if (key == "u_init") cfg.u_init = num();
        else if (key == "u1") cfg.u1 = num();
        else if (key == "u2") cfg.u2 = num();
        else if (key == "delta") cfg.sweep.delta = num();
        else if (key == "max_sweeps") cfg.sweep.max_sweeps = static_cast<std::size_t>(num());
        else if (key == "relaxation") cfg.sweep.relaxation = num();
        else if (key == "newton_tol") cfg.newton.tol = num();
        else if (key == "newton_max_iter") cfg.newton.max_iter = static_cast<std::size_t>(num());
        else if (key == "workers") cfg.workers = static_cast<int>(num());
        else if (key == "out" || key == "output_dir") cfg.output_dir = val;
        else if (key == "r") cfg.params.r = num();
        else if (key == "p") cfg.params.p = num();
        else if (key == "xi1") cfg.params.xi1 = num();
        else if (key == "xi2") cfg.params.xi2 = num();
        else if (key == "c1") { cfg.params.c1 = num(); cfg.c1c2_explicit = true; }
        else if (key == "c2") { cfg.params.c2 = num(); cfg.c1c2_explicit = true; }
        else if (key == "q1") cfg.params.q1 = num();
        else if (key == "q2") cfg.params.q2 = num();
        else if (key == "q3") cfg.params.q3 = num();
        else if (key == "s") cfg.params.s = num();
        else if (key == "rho") cfg.params.rho = num();
        else if (key == "h") cfg.params.h = num();
        else if (key == "mu") cfg.params.mu = num();
        else if (key == "beta") cfg.params.beta = num();
        else if (key == "g") cfg.params.g = num();
        else if (key == "d") cfg.params.d = num();
        else if (key == "eps") cfg.params.eps = num();
        else if (key == "gamma2") cfg.params.gamma2 = num();
        else if (key == "omega1") cfg.params.omega1 = num();
        else if (key == "omega2") cfg.params.omega2 = num();
        else
            throw ParseError("line " + std::to_string(line) + ": unknown key '" + key +
                             "'");
    }
    cfg.validate();
    return cfg;
}

inline std::string serialize_config(const RunConfig& cfg) {
    using detail::format_double;
    std::string out;
    auto kv = [&](const std::string& k, const std::string& v) {
        out += k + " = " + v + "\n";
    };
    kv("scenario", scenario_name(cfg.scenario));
    kv("alpha_list", detail::format_list(cfg.alpha_list));
    kv("gamma1_list", detail::format_list(cfg.gamma1_list));
    kv("tf", format_double(cfg.tf));
    kv("dt", format_double(cfg.dt));
    kv("T0", format_double(cfg.x0.T));
    kv("I0", format_double(cfg.x0.I));
    kv("F0", format_double(cfg.x0.F));
    kv("D10", format_double(cfg.x0.D1));
    kv("D20", format_double(cfg.x0.D2));
    kv("u_init", format_double(cfg.u_init));
    kv("u1", format_double(cfg.u1));
    kv("u2", format_double(cfg.u2));
    kv("delta", format_double(cfg.sweep.delta));
    kv("max_sweeps", std::to_string(cfg.sweep.max_sweeps));
    kv("relaxation", format_double(cfg.sweep.relaxation));
    kv("newton_tol", format_double(cfg.newton.tol));
    kv("newton_max_iter", std::to_string(cfg.newton.max_iter));
    kv("workers", std::to_string(cfg.workers));
    kv("out", cfg.output_dir);
    const ModelParams& m = cfg.params;
    kv("r", format_double(m.r));
    kv("p", format_double(m.p));
    kv("xi1", format_double(m.xi1));
    kv("xi2", format_double(m.xi2));
    if (cfg.c1c2_explicit) {
        kv("c1", format_double(m.c1));
        kv("c2", format_double(m.c2));
    }
    kv("q1", format_double(m.q1));
    kv("q2", format_double(m.q2));
    kv("q3", format_double(m.q3));
    kv("s", format_double(m.s));
    kv("rho", format_double(m.rho));
    kv("h", format_double(m.h));
    kv("mu", format_double(m.mu));
    kv("beta", format_double(m.beta));
    kv("g", format_double(m.g));
    kv("d", format_double(m.d));
    kv("eps", format_double(m.eps));
    kv("gamma2", format_double(m.gamma2));
    kv("omega1", format_double(m.omega1));
    kv("omega2", format_double(m.omega2));
    return out;
}

}  // namespace ftoc

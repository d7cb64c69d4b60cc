#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "porodg/errors.hpp"
#include "porodg/march.hpp"
#include "porodg/problems.hpp"

namespace porodg {

/// One run of the solver as described by a plain "key = value" config.
/// Unknown keys are hard errors; all defaults are documented by
/// print_defaults().
struct RunConfig {
    std::string problem;  // required: terzaghi | ms1 | ms1-gravity
    int nx = -1, ny = -1; // < 0: preset default
    double lx = -1.0, ly = -1.0;
    int r = 0;
    double tau = -1.0;
    int n_slabs = -1;
    double T = -1.0;
    MarchMethod method = MarchMethod::monolithic_spectral;
    BlockSolverKind block_solver = BlockSolverKind::gmres_fs;
    double tol = 1e-8;
    int restart = 100;
    int max_iter = 400;
    int sweeps = 1;      // truncation sweeps of the preconditioner
    double stab = -1.0;  // < 0: default b^2/K_dr
    int fs_max_sweeps = 200;
    double penalty = 10.0;
    std::string out_dir = "out";
    bool vtk = false;
    bool csv = true;
    bool iteration_log = true;
    int levels = 3;
    std::string refine_in = "space";  // space | time | both
    std::string ms1_s = "affine";     // affine | poly2 | poly3 | sin2

    // material overrides (NaN: keep preset default)
    double lambda = NAN, mu = NAN, k_perm = NAN, eta = NAN;
    double biot_b = NAN, biot_m = NAN, k_s = NAN;
    double rho_b = NAN, rho_f = NAN, gravity_x = NAN, gravity_y = NAN;
    double load = NAN;

    // resolved at parse time
    int resolved_slabs = 0;
    double resolved_T = 0.0;

    SolveOptions solve_options() const {
        SolveOptions o;
        o.block_solver = block_solver;
        o.gmres.tol = tol;
        o.gmres.restart = restart;
        o.gmres.max_iter = max_iter;
        o.fs.stab = stab;
        o.fs.tol = method == MarchMethod::fixed_stress ? tol : 1e-10;
        o.fs.max_sweeps = fs_max_sweeps;
        o.fs.truncation_sweeps = sweeps;
        return o;
    }
};

namespace detail {

struct KeyEntry {
    std::string value;
    int line;
};

inline double parse_double(const std::string& s, const std::string& key, int line) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e)
        throw ConfigError("key '" + key + "': cannot parse '" + s + "' as a number", line);
    return v;
}

inline int parse_int(const std::string& s, const std::string& key, int line) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("key '" + key + "': cannot parse '" + s + "' as an integer", line);
    return v;
}

inline bool parse_bool(const std::string& s, const std::string& key, int line) {
    if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "off" || s == "no") return false;
    throw ConfigError("key '" + key + "': cannot parse '" + s + "' as a boolean", line);
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    std::map<std::string, detail::KeyEntry> entries;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value': '" + line + "'", lineno);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigError("empty key or value", lineno);
        if (entries.count(key)) throw ConfigError("duplicate key '" + key + "'", lineno);
        entries[key] = {value, lineno};
    }

    RunConfig cfg;
    auto take = [&](const std::string& key) -> const detail::KeyEntry* {
        const auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };
    auto get_double = [&](const std::string& key, double& dst) {
        if (const auto* e = take(key)) dst = detail::parse_double(e->value, key, e->line);
    };
    auto get_int = [&](const std::string& key, int& dst) {
        if (const auto* e = take(key)) dst = detail::parse_int(e->value, key, e->line);
    };
    auto get_bool = [&](const std::string& key, bool& dst) {
        if (const auto* e = take(key)) dst = detail::parse_bool(e->value, key, e->line);
    };
    auto get_string = [&](const std::string& key, std::string& dst) {
        if (const auto* e = take(key)) dst = e->value;
    };

    static const std::vector<std::string> known = {
        "problem", "nx", "ny", "lx", "ly", "r", "tau", "n_slabs", "T", "method", "block_solver",
        "tol", "restart", "max_iter", "sweeps", "stab", "fs_max_sweeps", "penalty", "out_dir",
        "vtk", "csv", "iteration_log", "levels", "refine_in", "ms1_s", "lambda", "mu", "k_perm",
        "eta", "biot_b", "biot_m", "k_s", "rho_b", "rho_f", "gravity_x", "gravity_y", "load"};
    for (const auto& [key, e] : entries) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown key '" + key + "'", e.line);
    }

    get_string("problem", cfg.problem);
    if (cfg.problem.empty()) throw ConfigError("missing required key 'problem'");

    get_int("nx", cfg.nx);
    get_int("ny", cfg.ny);
    get_double("lx", cfg.lx);
    get_double("ly", cfg.ly);
    get_int("r", cfg.r);
    get_double("tau", cfg.tau);
    get_int("n_slabs", cfg.n_slabs);
    get_double("T", cfg.T);
    get_double("tol", cfg.tol);
    get_int("restart", cfg.restart);
    get_int("max_iter", cfg.max_iter);
    get_int("sweeps", cfg.sweeps);
    get_double("stab", cfg.stab);
    get_int("fs_max_sweeps", cfg.fs_max_sweeps);
    get_double("penalty", cfg.penalty);
    get_string("out_dir", cfg.out_dir);
    get_bool("vtk", cfg.vtk);
    get_bool("csv", cfg.csv);
    get_bool("iteration_log", cfg.iteration_log);
    get_int("levels", cfg.levels);
    get_string("refine_in", cfg.refine_in);
    get_string("ms1_s", cfg.ms1_s);
    get_double("lambda", cfg.lambda);
    get_double("mu", cfg.mu);
    get_double("k_perm", cfg.k_perm);
    get_double("eta", cfg.eta);
    get_double("biot_b", cfg.biot_b);
    get_double("biot_m", cfg.biot_m);
    get_double("k_s", cfg.k_s);
    get_double("rho_b", cfg.rho_b);
    get_double("rho_f", cfg.rho_f);
    get_double("gravity_x", cfg.gravity_x);
    get_double("gravity_y", cfg.gravity_y);
    get_double("load", cfg.load);

    if (const auto* e = take("method")) {
        if (e->value == "monolithic-spectral")
            cfg.method = MarchMethod::monolithic_spectral;
        else if (e->value == "fixed-stress")
            cfg.method = MarchMethod::fixed_stress;
        else
            throw ConfigError("key 'method': expected monolithic-spectral or fixed-stress", e->line);
    }
    if (const auto* e = take("block_solver")) {
        if (e->value == "direct")
            cfg.block_solver = BlockSolverKind::direct;
        else if (e->value == "gmres-fs")
            cfg.block_solver = BlockSolverKind::gmres_fs;
        else
            throw ConfigError("key 'block_solver': expected direct or gmres-fs", e->line);
    }

    auto line_of = [&](const std::string& key) {
        const auto* e = take(key);
        return e ? e->line : 0;
    };
    if (cfg.r < 0 || cfg.r > kMaxTimeDegree)
        throw ConfigError("key 'r': degree must lie in [0, 10]", line_of("r"));
    if (cfg.refine_in != "space" && cfg.refine_in != "time" && cfg.refine_in != "both")
        throw ConfigError("key 'refine_in': expected space, time or both", line_of("refine_in"));
    if (cfg.levels < 1) throw ConfigError("key 'levels': must be >= 1", line_of("levels"));
    if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) throw ConfigError("key 'tol': must be in (0, 1)", line_of("tol"));
    smode_from_string(cfg.ms1_s);  // validates

    // tau / n_slabs / T consistency.
    const bool has_tau = cfg.tau > 0.0, has_n = cfg.n_slabs > 0, has_T = cfg.T > 0.0;
    if (take("tau") && !(cfg.tau > 0.0)) throw ConfigError("key 'tau': must be positive", line_of("tau"));
    if (take("n_slabs") && !(cfg.n_slabs > 0))
        throw ConfigError("key 'n_slabs': must be positive", line_of("n_slabs"));
    if (has_tau && has_n && has_T) {
        if (std::abs(cfg.tau * cfg.n_slabs - cfg.T) > 1e-9 * std::max(1.0, cfg.T))
            throw ConfigError("inconsistent time keys: tau * n_slabs != T", line_of("tau"));
        cfg.resolved_slabs = cfg.n_slabs;
        cfg.resolved_T = cfg.T;
    } else if (has_tau && has_T) {
        const double n = cfg.T / cfg.tau;
        const int ni = static_cast<int>(std::lround(n));
        if (ni < 1 || std::abs(ni * cfg.tau - cfg.T) > 1e-9 * std::max(1.0, cfg.T))
            throw ConfigError("key 'tau': T is not an integer multiple of tau", line_of("tau"));
        cfg.resolved_slabs = ni;
        cfg.resolved_T = cfg.T;
    } else if (has_n && has_T) {
        cfg.resolved_slabs = cfg.n_slabs;
        cfg.resolved_T = cfg.T;
    } else if (has_tau && has_n) {
        cfg.resolved_slabs = cfg.n_slabs;
        cfg.resolved_T = cfg.tau * cfg.n_slabs;
    } else {
        throw ConfigError("time discretization underdetermined: give two of tau, n_slabs, T");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Apply the config's preset selection and overrides.
inline ProblemSpec problem_from_config(const RunConfig& cfg) {
    PresetOptions opt;
    opt.smode = smode_from_string(cfg.ms1_s);
    MaterialConfig mc;
    if (!std::isnan(cfg.lambda)) mc.lambda = cfg.lambda;
    if (!std::isnan(cfg.mu)) mc.mu = cfg.mu;
    if (!std::isnan(cfg.k_perm)) mc.k_perm = cfg.k_perm;
    if (!std::isnan(cfg.eta)) mc.eta = cfg.eta;
    if (!std::isnan(cfg.biot_m)) mc.biot_m = cfg.biot_m;
    if (!std::isnan(cfg.biot_b)) mc.biot_b = cfg.biot_b;
    if (!std::isnan(cfg.k_s)) {
        mc.k_s = cfg.k_s;
        if (std::isnan(cfg.biot_b)) mc.biot_b = -1.0;  // derive from k_s
    }
    if (!std::isnan(cfg.rho_b)) mc.rho_b = cfg.rho_b;
    if (!std::isnan(cfg.rho_f)) mc.rho_f = cfg.rho_f;
    if (!std::isnan(cfg.gravity_x)) mc.gravity[0] = cfg.gravity_x;
    if (!std::isnan(cfg.gravity_y)) mc.gravity[1] = cfg.gravity_y;
    opt.material = mc;
    opt.has_material = !std::isnan(cfg.lambda) || !std::isnan(cfg.mu) || !std::isnan(cfg.rho_f) ||
                       !std::isnan(cfg.gravity_x) || !std::isnan(cfg.gravity_y);
    if (!std::isnan(cfg.load)) opt.load = cfg.load;

    ProblemSpec ps = make_problem(cfg.problem, opt);
    if (cfg.nx > 0) ps.nx = cfg.nx;
    if (cfg.ny > 0) ps.ny = cfg.ny;
    if (cfg.lx > 0.0) ps.lx = cfg.lx;
    if (cfg.ly > 0.0) ps.ly = cfg.ly;
    ps.T = cfg.resolved_T;
    return ps;
}

inline void print_defaults(std::ostream& os) {
    os << "# porodg run configuration: key = value, '#' starts a comment.\n"
          "# Unknown keys are errors. Defaults shown below.\n"
          "problem = terzaghi        # terzaghi | ms1 | ms1-gravity (required)\n"
          "# nx, ny, lx, ly          # mesh; defaults come from the preset\n"
          "r = 0                     # dG(r) time degree, 0..10\n"
          "# tau, n_slabs, T         # give two; tau * n_slabs = T must hold\n"
          "method = monolithic-spectral   # or fixed-stress\n"
          "block_solver = gmres-fs   # or direct (spectral method only)\n"
          "tol = 1e-8                # GMRES / fixed-stress relative residual\n"
          "restart = 100\n"
          "max_iter = 400\n"
          "sweeps = 1                # truncated fixed-stress sweeps per preconditioner call\n"
          "stab = -1                 # fixed-stress stabilization; < 0 = b^2/K_dr\n"
          "fs_max_sweeps = 200\n"
          "penalty = 10              # SIPG coefficient gamma\n"
          "out_dir = out             # overridden by env PORODG_OUTDIR\n"
          "vtk = false               # write final-state legacy VTK\n"
          "csv = true                # write convergence CSV (converge mode)\n"
          "iteration_log = true      # write per-slab iteration CSV (run mode)\n"
          "levels = 3                # refinement levels (converge mode)\n"
          "refine_in = space         # space | time | both\n"
          "ms1_s = affine            # affine | poly2 | poly3 | sin2\n"
          "# lambda, mu, k_perm, eta, biot_b, biot_m, k_s, rho_b, rho_f,\n"
          "# gravity_x, gravity_y, load   # material / load overrides\n";
}

} // namespace porodg

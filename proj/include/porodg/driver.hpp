#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "porodg/analysis.hpp"
#include "porodg/config.hpp"
#include "porodg/csv.hpp"
#include "porodg/march.hpp"
#include "porodg/problems.hpp"
#include "porodg/vtk.hpp"

namespace porodg {

inline std::string resolve_out_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("PORODG_OUTDIR")) return env;
    return cfg.out_dir;
}

inline int max_block_iterations(const SlabRecord& rec) {
    int it = 0;
    for (const BlockReport& br : rec.reports) it = std::max(it, std::max(br.gmres_iterations, br.fs_sweeps));
    return it;
}

/// Execute one march and write the requested outputs. Prints one line per
/// slab: index, t_n, method, iterations, final residual.
inline int run(const RunConfig& cfg, std::ostream& os = std::cout) {
    const ProblemSpec ps = problem_from_config(cfg);
    const DiscreteProblem dp = discretize(ps, cfg.penalty);
    const TimePartition part = uniform_partition(cfg.resolved_T, cfg.resolved_slabs);

    const Trajectory traj = march(dp, part, cfg.r, cfg.method, cfg.solve_options());

    for (int n = 0; n < part.n_slabs(); ++n) {
        const SlabRecord& rec = traj.slabs[n];
        double res = 0.0;
        for (const BlockReport& br : rec.reports)
            res = std::max(res, br.report.final_relative_residual);
        char line[160];
        std::snprintf(line, sizeof(line), "slab %4d  t_n=%-12.6g method=%s iters=%d res=%.3e", n,
                      part.t_end(n), to_string(cfg.method).c_str(), max_block_iterations(rec), res);
        os << line << "\n";
    }

    const std::string out = resolve_out_dir(cfg);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory: " + out);

    if (cfg.iteration_log) write_iteration_log(traj, out + "/iterations.csv");
    if (cfg.vtk) {
        const FieldVecs end = traj.slabs.back().state.end_trace();
        const Eigen::VectorXd sv = volumetric_mean_stress(dp.mesh, dp.dofs, dp.ops, end.u, end.p);
        write_vtk(dp.mesh, dp.dofs, end.u, end.q, end.p, sv, out + "/final_state.vtk");
    }
    return 0;
}

/// Refinement study driven by refine_in: "space" and "both" measure against
/// the analytic solution; "time" measures against a reference trajectory of
/// degree r+1 on tau_min/4 (same mesh), which isolates the temporal order.
inline int converge(const RunConfig& cfg, std::ostream& os = std::cout) {
    const bool in_space = cfg.refine_in == "space" || cfg.refine_in == "both";
    const bool in_time = cfg.refine_in == "time" || cfg.refine_in == "both";

    std::vector<ConvergenceRow> rows;
    std::vector<Trajectory> trajs;
    std::vector<DiscreteProblem> dps;

    for (int level = 0; level < cfg.levels; ++level) {
        ProblemSpec ps = problem_from_config(cfg);
        const int scale = in_space ? (1 << level) : 1;
        ps.nx *= scale;
        ps.ny *= scale;
        const int slabs = cfg.resolved_slabs * (in_time ? (1 << level) : 1);
        const DiscreteProblem dp = discretize(ps, cfg.penalty);
        const TimePartition part = uniform_partition(cfg.resolved_T, slabs);
        const Trajectory traj = march(dp, part, cfg.r, cfg.method, cfg.solve_options());

        ConvergenceRow row;
        row.h = std::max(dp.mesh.hx(), dp.mesh.hy());
        row.tau = cfg.resolved_T / slabs;
        row.r = cfg.r;
        if (cfg.refine_in == "time") {
            trajs.push_back(traj);
            dps.push_back(dp);
            rows.push_back(row);  // errors filled once the reference exists
            continue;
        }
        if (!ps.exact.available || !ps.exact.u)
            throw ConfigError("convergence study needs a problem with a full exact solution");
        const FieldErrors e = l2l2_error_vs_exact(dp.mesh, dp.dofs, traj, ps.exact);
        row.error_p = e.p;
        row.error_u = e.u;
        row.error_q = e.q;
        rows.push_back(row);
    }

    if (cfg.refine_in == "time") {
        // Reference: same mesh, degree r+1, four times the finest slab count.
        ProblemSpec ps = problem_from_config(cfg);
        const DiscreteProblem dp = discretize(ps, cfg.penalty);
        const int ref_slabs = cfg.resolved_slabs * (1 << (cfg.levels - 1)) * 4;
        const TimePartition ref_part = uniform_partition(cfg.resolved_T, ref_slabs);
        const Trajectory ref = march(dp, ref_part, cfg.r + 1, cfg.method, cfg.solve_options());
        for (int level = 0; level < cfg.levels; ++level) {
            const FieldErrors e = l2l2_trajectory_diff(dp.mesh, dp.dofs, trajs[level], ref);
            rows[level].error_p = e.p;
            rows[level].error_u = e.u;
            rows[level].error_q = e.q;
        }
    }

    for (std::size_t i = 0; i < rows.size(); ++i) {
        char line[200];
        std::snprintf(line, sizeof(line), "level %zu  h=%-10.4g tau=%-10.4g e_p=%-12.5e e_u=%-12.5e e_q=%-12.5e",
                      i, rows[i].h, rows[i].tau, rows[i].error_p, rows[i].error_u, rows[i].error_q);
        os << line;
        if (i > 0) {
            std::snprintf(line, sizeof(line), "  order_p=%.3f", std::log2(rows[i - 1].error_p / rows[i].error_p));
            os << line;
        }
        os << "\n";
    }

    if (cfg.csv) {
        const std::string out = resolve_out_dir(cfg);
        std::error_code ec;
        std::filesystem::create_directories(out, ec);
        if (ec) throw IoError("cannot create output directory: " + out);
        write_csv_convergence(rows, out + "/convergence.csv");
    }
    return 0;
}

} // namespace porodg

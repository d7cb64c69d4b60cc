#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "porodg/slab.hpp"

namespace porodg {

enum class MarchMethod { monolithic_spectral, fixed_stress };

inline std::string to_string(MarchMethod m) {
    return m == MarchMethod::monolithic_spectral ? "monolithic-spectral" : "fixed-stress";
}

/// Fully discretized problem: mesh, dof layout, assembled operators, run
/// data and projected initial coefficients.
struct DiscreteProblem {
    Mesh mesh;
    DofMaps dofs;
    SpatialOperators ops;
    VolumeData data;
    Eigen::VectorXd u_init, p_init;  // projected initial fields
};

struct SlabRecord {
    SlabState state;
    std::vector<BlockReport> reports;
};

struct Trajectory {
    TimePartition partition;
    TimeBasis basis;
    std::vector<SlabRecord> slabs;
};

/// Sequential slab loop. The initial conditions enter weakly through the
/// first slab's jump term only; afterwards jump data is the previous end
/// trace. For the monolithic-spectral method each slab is solved in the
/// Schur-transformed quasi-triangular form; the fixed-stress method applies
/// the iterative coupling sweeps to the full untransformed slab system
/// (theta = G_hat, kappa = diag M_hat) and never touches the Schur form.
inline Trajectory march(const DiscreteProblem& prob, const TimePartition& partition, int r,
                        MarchMethod method, const SolveOptions& opt) {
    partition.validate();
    Trajectory traj;
    traj.partition = partition;
    traj.basis = time_matrices(r);
    const TimeBasis& basis = traj.basis;
    const SchurForm schur = real_schur(basis);
    const SpatialOperators& ops = prob.ops;

    Eigen::VectorXd u_prev = prob.u_init, p_prev = prob.p_init;
    Eigen::VectorXd trace_prev;  // full previous end trace, fixed-stress warm start

    std::unique_ptr<SlabSolver> spectral;
    std::unique_ptr<FixedStressSolver> fs;
    double cached_tau = -1.0;

    for (int n = 0; n < partition.n_slabs(); ++n) {
        const double tau = partition.slab_length(n);
        const double t0 = partition.t_begin(n);

        std::vector<FieldVecs> nodal(basis.n_nodes());
        for (int i = 0; i < basis.n_nodes(); ++i)
            nodal[i] = assemble_rhs(prob.mesh, prob.dofs, ops.mat, ops, prob.data, t0 + basis.nodes[i] * tau);

        const SlabSystem sys = build_slab_system(ops, basis, schur, tau, nodal, u_prev, p_prev);

        const bool rebuild = cached_tau < 0.0 || std::abs(tau - cached_tau) > 1e-12 * tau;
        try {
            SlabRecord rec;
            if (method == MarchMethod::monolithic_spectral) {
                if (rebuild) spectral = std::make_unique<SlabSolver>(ops, basis, schur, tau, opt);
                auto [state, reports] = spectral->solve(sys);
                rec.state = std::move(state);
                rec.reports = std::move(reports);
            } else {
                if (rebuild)
                    fs = std::make_unique<FixedStressSolver>(ops, basis.G_hat, basis.weights, tau,
                                                             opt.fs.resolve_stab(ops.mat));
                Eigen::VectorXd rhs(basis.n_nodes() * ops.n_total());
                for (int i = 0; i < basis.n_nodes(); ++i)
                    rhs.segment(i * ops.n_total(), ops.n_total()) = sys.rhs[i];
                // Warm start all components from the previous end trace.
                Eigen::VectorXd x0;
                if (trace_prev.size()) {
                    x0.resize(basis.n_nodes() * ops.n_total());
                    for (int i = 0; i < basis.n_nodes(); ++i)
                        x0.segment(i * ops.n_total(), ops.n_total()) = trace_prev;
                }
                auto [x, rep] = fs->solve(rhs, opt.fs, x0);
                if (!rep.converged)
                    throw SolverError("fixed-stress did not converge (rel res " +
                                      std::to_string(rep.final_relative_residual) + ")");
                rec.state.comps.resize(basis.n_nodes());
                for (int i = 0; i < basis.n_nodes(); ++i)
                    rec.state.comps[i] =
                        unstack_fields(ops, Eigen::VectorXd(x.segment(i * ops.n_total(), ops.n_total())));
                BlockReport br;
                br.block_index = 0;
                br.block_size = basis.n_nodes();
                br.fs_sweeps = rep.iterations;
                br.report = std::move(rep);
                rec.reports.push_back(std::move(br));
            }
            cached_tau = tau;
            u_prev = rec.state.end_trace().u;
            p_prev = rec.state.end_trace().p;
            trace_prev = stack_fields(ops, rec.state.end_trace());
            traj.slabs.push_back(std::move(rec));
        } catch (const SolverError& e) {
            throw SolverError("slab " + std::to_string(n) + " (t_n = " + std::to_string(partition.t_end(n)) +
                              "): " + e.what());
        }
    }
    return traj;
}

} // namespace porodg

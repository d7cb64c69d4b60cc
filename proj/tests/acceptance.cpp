// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion carries its stated tolerance and runtime
// budget; oracle constants were fixed beforehand by independent solves.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "porodg/analysis.hpp"
#include "porodg/march.hpp"
#include "porodg/problems.hpp"

using namespace porodg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct CheckFailure {
    std::string what;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw CheckFailure{what};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

DiscreteProblem random_smooth_problem(int nx, int ny, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> co(-1.0, 1.0);
    const double a1 = co(rng), a2 = co(rng), a3 = co(rng), a4 = co(rng), a5 = co(rng);
    const double b1 = co(rng), b2 = co(rng), b3 = co(rng);

    DiscreteProblem dp;
    dp.mesh = build_mesh(nx, ny, 1.0, 1.0);
    dp.dofs = build_dof_maps(dp.mesh);
    MaterialConfig mc;
    BoundarySpec bc = BoundarySpec::all_fixed_pressure(
        [=](double x, double y, double t) { return a4 * std::cos(M_PI * x) * (1.0 + 0.3 * y) * std::cos(t); });
    dp.ops = assemble_operators(dp.mesh, dp.dofs, material_from_config(mc), 10.0, bc);
    dp.data.momentum = [=](double x, double y, double t) -> std::array<double, 2> {
        return {a1 * std::sin(M_PI * x) * std::cos(M_PI * y) * (1.0 + t),
                a2 * std::cos(M_PI * x) * std::sin(M_PI * y) * std::sin(t + 0.3)};
    };
    dp.data.darcy = [=](double x, double y, double t) -> std::array<double, 2> {
        return {a3 * std::sin(M_PI * y) * std::cos(0.5 * t), a5 * std::cos(M_PI * x) * (1.0 - 0.2 * t)};
    };
    dp.data.mass = [=](double x, double y, double t) {
        return b1 * std::cos(M_PI * x) * std::cos(M_PI * y) * std::exp(-t) + b2 * x * y;
    };
    dp.u_init = project_u(dp.mesh, dp.dofs, [=](double x, double y) -> std::array<double, 2> {
        return {b3 * std::sin(M_PI * x) * std::sin(M_PI * y) * 0.1, b1 * x * (1.0 - x) * y * 0.1};
    });
    dp.p_init = project_p(dp.mesh, dp.dofs,
                          [=](double x, double y) { return b2 * std::cos(M_PI * x) * std::cos(M_PI * y); });
    return dp;
}

MatrixXd dense_full_system(const SpatialOperators& ops, const TimeBasis& basis, double tau) {
    const int nt = ops.n_total(), n = basis.n_nodes();
    const MatrixXd kd = dense_stationary(ops);
    const MatrixXd dd = dense_time_derivative(ops);
    MatrixXd full = MatrixXd::Zero(n * nt, n * nt);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            full.block(i * nt, j * nt, nt, nt) = basis.G_hat(i, j) * dd + tau * basis.M_hat(i, j) * kd;
    return full;
}

double state_norm(const SlabState& st) {
    double s = 0.0;
    for (const FieldVecs& f : st.comps) s += f.u.squaredNorm() + f.q.squaredNorm() + f.p.squaredNorm();
    return std::sqrt(s);
}

double state_diff(const SlabState& a, const SlabState& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.comps.size(); ++j)
        s += (a.comps[j].u - b.comps[j].u).squaredNorm() + (a.comps[j].q - b.comps[j].q).squaredNorm() +
             (a.comps[j].p - b.comps[j].p).squaredNorm();
    return std::sqrt(s);
}

ProblemSpec terzaghi_column(int ny) {
    ProblemSpec ps = make_problem("terzaghi");
    ps.ny = ny;
    ps.nx = std::max(1, ny / 32);
    ps.lx = ps.ly * ps.nx / ny;  // square cells
    return ps;
}

/// Manual slab loop for the consolidation run, collecting per-slab reports
/// and local mass residuals.
struct TerzaghiRun {
    DiscreteProblem dp;
    std::vector<int> iters;        // max per-slab iteration count
    std::vector<double> mass_rel;  // per-slab max cell residual / scale
    VectorXd p_end;                // pressure trace at the final time
};

TerzaghiRun run_terzaghi(int ny, int r, int n_slabs, double t_end, const SolveOptions& opt) {
    TerzaghiRun out;
    out.dp = discretize(terzaghi_column(ny));
    const SpatialOperators& ops = out.dp.ops;
    const TimeBasis basis = time_matrices(r);
    const SchurForm schur = real_schur(basis);
    const TimePartition part = uniform_partition(t_end, n_slabs);
    const double tau = part.slab_length(0);
    const SlabSolver solver(ops, basis, schur, tau, opt);

    VectorXd u_prev = out.dp.u_init, p_prev = out.dp.p_init;
    for (int n = 0; n < part.n_slabs(); ++n) {
        std::vector<FieldVecs> nodal(basis.n_nodes());
        for (int i = 0; i < basis.n_nodes(); ++i)
            nodal[i] = assemble_rhs(out.dp.mesh, out.dp.dofs, ops.mat, ops, out.dp.data,
                                    part.t_begin(n) + basis.nodes[i] * tau);
        const SlabSystem sys = build_slab_system(ops, basis, schur, tau, nodal, u_prev, p_prev);
        auto [state, reports] = solver.solve(sys);
        int it = 0;
        for (const BlockReport& br : reports) it = std::max(it, br.gmres_iterations);
        out.iters.push_back(it);
        const MassResidual mr = local_mass_residual(sys, state);
        out.mass_rel.push_back(mr.residual.maxCoeff() / mr.scale);
        u_prev = state.end_trace().u;
        p_prev = state.end_trace().p;
        if (n == part.n_slabs() - 1) out.p_end = state.end_trace().p;
    }
    return out;
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

// 1: spectral solve == dense direct solve of the untransformed systems.
std::string criterion1() {
    const DiscreteProblem dp = random_smooth_problem(4, 4, 2024);
    const TimePartition part = uniform_partition(0.3, 3);
    double worst = 0.0;
    for (int r : {0, 1, 2}) {
        const TimeBasis basis = time_matrices(r);
        const SchurForm schur = real_schur(basis);
        if (r == 2) {
            int n1 = 0, n2 = 0;
            for (int sz : schur.block_sizes) (sz == 1 ? n1 : n2)++;
            require(n1 == 1 && n2 == 1, "r = 2 must factor into exactly one 1x1 and one 2x2 block");
        }

        // Independent dense march.
        const SpatialOperators& ops = dp.ops;
        const int nt = ops.n_total(), nn = basis.n_nodes();
        const DenseLu lu(dense_full_system(ops, basis, part.slab_length(0)));
        VectorXd u_prev = dp.u_init, p_prev = dp.p_init;
        std::vector<SlabState> oracle;
        for (int s = 0; s < part.n_slabs(); ++s) {
            std::vector<FieldVecs> nodal(nn);
            for (int i = 0; i < nn; ++i)
                nodal[i] = assemble_rhs(dp.mesh, dp.dofs, ops.mat, ops, dp.data,
                                        part.t_begin(s) + basis.nodes[i] * part.slab_length(s));
            const SlabSystem sys =
                build_slab_system(ops, basis, schur, part.slab_length(s), nodal, u_prev, p_prev);
            VectorXd rhs(nn * nt);
            for (int i = 0; i < nn; ++i) rhs.segment(i * nt, nt) = sys.rhs[i];
            const VectorXd x = lu.solve(rhs);
            SlabState st;
            st.comps.resize(nn);
            for (int i = 0; i < nn; ++i)
                st.comps[i] = unstack_fields(ops, VectorXd(x.segment(i * nt, nt)));
            u_prev = st.comps.back().u;
            p_prev = st.comps.back().p;
            oracle.push_back(std::move(st));
        }

        SolveOptions opt;
        opt.block_solver = BlockSolverKind::gmres_fs;
        opt.gmres.tol = 1e-12;
        const Trajectory traj = march(dp, part, r, MarchMethod::monolithic_spectral, opt);
        for (int s = 0; s < part.n_slabs(); ++s) {
            const double rel = state_diff(traj.slabs[s].state, oracle[s]) / state_norm(oracle[s]);
            require(rel <= 1e-10,
                    "r=" + std::to_string(r) + " slab " + std::to_string(s) + ": rel err " + fmt(rel));
            worst = std::max(worst, rel);
        }
    }
    return "max rel err " + fmt(worst) + " (<= 1e-10), r=2 block structure 1x1 + 2x2";
}

// 2: temporal convergence of MS1 with s(t) = sin(t) + 2 under tau-halving,
// measured against an (r+1)-degree fine reference on the same mesh.
std::string criterion2() {
    PresetOptions po;
    po.smode = SMode::sin2;
    ProblemSpec ps = make_problem("ms1", po);
    ps.nx = ps.ny = 16;
    const DiscreteProblem dp = discretize(ps);
    const double T = 1.0;

    SolveOptions opt;
    opt.block_solver = BlockSolverKind::gmres_fs;
    opt.gmres.tol = 1e-11;

    std::ostringstream note;
    for (int r : {0, 1}) {
        const Trajectory ref =
            march(dp, uniform_partition(T, 64), r + 1, MarchMethod::monolithic_spectral, opt);
        std::vector<double> errs;
        for (int level = 0; level < 4; ++level) {
            const Trajectory traj =
                march(dp, uniform_partition(T, 2 << level), r, MarchMethod::monolithic_spectral, opt);
            errs.push_back(l2l2_trajectory_diff(dp.mesh, dp.dofs, traj, ref).p);
        }
        const double order = std::log2(errs[2] / errs[3]);
        const double want = r == 0 ? 0.9 : 1.9;
        require(order >= want, "r=" + std::to_string(r) + ": observed pressure order " + fmt(order) +
                                   " < " + fmt(want));
        note << "r=" << r << " order " << fmt(order) << (r == 0 ? ", " : "");
    }
    return note.str() + " (>= 0.9 / 1.9)";
}

// 3: spatial convergence of MS1 at r = 1 under h-halving.
std::string criterion3() {
    SolveOptions opt;
    opt.block_solver = BlockSolverKind::gmres_fs;
    opt.gmres.tol = 1e-11;

    std::vector<FieldErrors> errs;
    for (int n : {4, 8, 16}) {
        PresetOptions po;
        po.smode = SMode::sin2;
        ProblemSpec ps = make_problem("ms1", po);
        ps.nx = ps.ny = n;
        const DiscreteProblem dp = discretize(ps);
        const Trajectory traj =
            march(dp, uniform_partition(0.5, 10), 1, MarchMethod::monolithic_spectral, opt);
        errs.push_back(l2l2_error_vs_exact(dp.mesh, dp.dofs, traj, ps.exact));
    }
    const double op = std::log2(errs[1].p / errs[2].p);
    const double oq = std::log2(errs[1].q / errs[2].q);
    const double ou = std::log2(errs[1].u / errs[2].u);
    require(op >= 0.9, "pressure order " + fmt(op) + " < 0.9");
    require(oq >= 0.9, "flux order " + fmt(oq) + " < 0.9");
    require(ou >= 1.9, "displacement order " + fmt(ou) + " < 1.9");
    return "orders p " + fmt(op) + ", q " + fmt(oq) + ", u " + fmt(ou) + " (>= 0.9 / 0.9 / 1.9)";
}

// 4: Terzaghi pressure against the series oracle at c_v t / H^2 = 0.1.
std::string criterion4(TerzaghiRun& run_out) {
    const ProblemSpec ps = terzaghi_column(32);
    const TerzaghiParams tz = make_terzaghi_params(ps.mat, ps.ly, 1.0);
    const double t_end = 0.1 / tz.c_v;  // c_v t / H^2 = 0.1
    const int n_slabs = 100;            // c_v tau / H^2 = 1e-3

    SolveOptions opt;  // direct per-block solves
    run_out = run_terzaghi(32, 0, n_slabs, t_end, opt);

    double num = 0.0, den = 0.0;
    const Mesh& mesh = run_out.dp.mesh;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double z = ps.ly - mesh.cells[c].cy();
        const double pex = terzaghi_pressure(z, t_end, tz, 200);
        const double area = mesh.cells[c].area();
        num += area * (run_out.p_end[c] - pex) * (run_out.p_end[c] - pex);
        den += area * pex * pex;
    }
    const double rel = std::sqrt(num / den);
    require(rel <= 0.02, "relative L2 pressure error " + fmt(rel) + " > 2%");
    return "relative L2 pressure error " + fmt(rel) + " (<= 0.02)";
}

// 5: fixed-stress correctness and contraction on the Terzaghi dG(0) slab.
std::string criterion5() {
    const DiscreteProblem dp = discretize(terzaghi_column(32));
    const SpatialOperators& ops = dp.ops;
    const TerzaghiParams tz = make_terzaghi_params(ops.mat, 1.0, 1.0);
    const double tau = 1e-3 / tz.c_v;

    const FieldVecs f = assemble_rhs(dp.mesh, dp.dofs, ops.mat, ops, dp.data, tau);
    VectorXd rhs = tau * stack_fields(ops, f);
    rhs.segment(ops.n_u + ops.n_q, ops.n_p) += apply_time_derivative_p(ops, dp.u_init, dp.p_init);

    FixedStressConfig cfg;  // stab = b^2 / K_dr
    cfg.tol = 1e-10;
    auto [x, rep] = fixed_stress_solve(ops, 1.0, tau, rhs, cfg);
    require(rep.converged, "fixed-stress did not reach tol 1e-10");

    const VectorXd xd = dense_solve(dense_time_derivative(ops) + tau * dense_stationary(ops), rhs);
    const double rel = (x - xd).norm() / xd.norm();
    require(rel <= 1e-8, "fixed-stress vs dense: " + fmt(rel) + " > 1e-8");

    double worst = 0.0;
    for (std::size_t k = 1; k < rep.residual_history.size(); ++k) {
        const double ratio = rep.residual_history[k] / rep.residual_history[k - 1];
        worst = std::max(worst, ratio);
        require(ratio < 1.0, "residual ratio " + fmt(ratio) + " >= 1 at sweep " + std::to_string(k));
    }
    return std::to_string(rep.iterations) + " sweeps, max ratio " + fmt(worst) + ", vs dense " + fmt(rel);
}

// 6: preconditioned GMRES iteration behavior on the consolidation column.
std::string criterion6() {
    const ProblemSpec ps = terzaghi_column(32);
    const TerzaghiParams tz = make_terzaghi_params(ps.mat, ps.ly, 1.0);
    const double t_end = 0.1 / tz.c_v;
    const int n_slabs = 100;

    SolveOptions opt;
    opt.block_solver = BlockSolverKind::gmres_fs;
    opt.gmres.tol = 1e-8;
    opt.fs.truncation_sweeps = 1;

    const TerzaghiRun run0 = run_terzaghi(32, 0, n_slabs, t_end, opt);
    int max0 = 0;
    for (int it : run0.iters) max0 = std::max(max0, it);
    require(max0 <= 10, "dG(0): " + std::to_string(max0) + " iterations > 10");

    const TerzaghiRun run1 = run_terzaghi(32, 1, n_slabs, t_end, opt);
    int max1 = 0;
    for (int it : run1.iters) max1 = std::max(max1, it);
    require(max1 <= 25, "dG(1): " + std::to_string(max1) + " iterations > 25");

    const TerzaghiRun run0f = run_terzaghi(64, 0, n_slabs, t_end, opt);
    int max0f = 0;
    for (int it : run0f.iters) max0f = std::max(max0f, it);
    require(std::abs(max0f - max0) <= 2,
            "dG(0) count changed by " + std::to_string(max0f - max0) + " under refinement ( > 2)");
    return "dG(0) max " + std::to_string(max0) + " (<= 10), dG(1) max " + std::to_string(max1) +
           " (<= 25), refined dG(0) max " + std::to_string(max0f) + " (delta <= 2)";
}

// 7: local mass conservation on the criterion-4 run.
std::string criterion7(const TerzaghiRun& run4) {
    require(!run4.mass_rel.empty(), "criterion 4 must run first");
    double worst = 0.0;
    for (double rel : run4.mass_rel) {
        worst = std::max(worst, rel);
        require(rel <= 1e-10, "per-cell mass residual " + fmt(rel) + " x scale > 1e-10 x scale");
    }
    return "max per-cell residual " + fmt(worst) + " x problem scale (<= 1e-10)";
}

// 8: algebraic identity suite.
std::string criterion8() {
    // Fixed-stress storage form == standard storage form.
    MaterialConfig mc;
    const MaterialParameters mat = material_from_config(mc);
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd;
    const double b = mat.biot_b, kdr = mat.k_dr, inv_m = 1.0 / mat.biot_m;
    for (int trial = 0; trial < 100; ++trial) {
        VectorXd eps(60), p(60);
        for (int i = 0; i < 60; ++i) {
            eps[i] = nd(rng);
            p[i] = nd(rng);
        }
        const VectorXd lhs = (b / kdr) * (kdr * eps - b * p) + (inv_m + b * b / kdr) * p;
        const VectorXd rhs = b * eps + inv_m * p;
        require((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-13 * rhs.cwiseAbs().maxCoeff(),
                "storage identity violated");
    }

    // b = 1 - K_dr / K_s enforcement.
    MaterialConfig mk;
    mk.biot_b = -1.0;
    mk.k_s = 4.0;  // K_dr = 2
    require(std::abs(material_from_config(mk).biot_b - 0.5) < 1e-15, "b from K_s");
    mk.k_s = 2.0;  // b = 0 rejected
    bool rejected = false;
    try {
        material_from_config(mk);
    } catch (const std::invalid_argument&) {
        rejected = true;
    }
    require(rejected, "b = 0 must be rejected");

    // r = 1 time matrices in closed form.
    const TimeBasis tb = time_matrices(1);
    require(std::abs(tb.M_hat(0, 0) - 0.75) < 1e-14 && std::abs(tb.M_hat(1, 1) - 0.25) < 1e-14,
            "M_hat(1) closed form");
    require(std::abs(tb.G_hat(0, 0) - 1.125) < 1e-13 && std::abs(tb.G_hat(0, 1) - 0.375) < 1e-13 &&
                std::abs(tb.G_hat(1, 0) + 1.125) < 1e-13 && std::abs(tb.G_hat(1, 1) - 0.625) < 1e-13,
            "G_hat(1) closed form");

    // Eigenvalues of W(1) equal 2 +- i sqrt(2).
    const SchurForm s = real_schur(tb);
    const auto ev = s.block_eigenvalue(0);
    require(std::abs(ev.real() - 2.0) < 1e-12 && std::abs(std::abs(ev.imag()) - std::sqrt(2.0)) < 1e-12,
            "eigenvalues of W(1)");
    return "storage identity, b consistency, r=1 matrices, W eigenvalues 2 +- i sqrt(2)";
}

} // namespace

int main() {
    int failures = 0;
    TerzaghiRun run4;  // shared between criteria 4 and 7

    struct Entry {
        int id;
        const char* name;
        double budget_s;
        std::function<std::string()> fn;
    };
    const std::vector<Entry> entries = {
        {1, "spectral-solve oracle equivalence", 10.0, criterion1},
        {2, "temporal convergence (MS1, tau-halving)", 120.0, criterion2},
        {3, "spatial convergence (MS1, h-halving)", 120.0, criterion3},
        {4, "Terzaghi verification vs series oracle", 60.0, [&] { return criterion4(run4); }},
        {5, "fixed-stress correctness and contraction", 30.0, criterion5},
        {6, "preconditioned GMRES iteration counts", 120.0, criterion6},
        {7, "local mass conservation", 60.0, [&] { return criterion7(run4); }},
        {8, "algebraic identity suite", 30.0, criterion8},
    };

    for (const Entry& e : entries) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string note;
        bool ok = true;
        try {
            note = e.fn();
        } catch (const CheckFailure& f) {
            ok = false;
            note = f.what;
        } catch (const std::exception& ex) {
            ok = false;
            note = std::string("exception: ") + ex.what();
        }
        const double secs =
            std::chrono::duration_cast<std::chrono::duration<double>>(std::chrono::steady_clock::now() - t0)
                .count();
        if (ok && secs > e.budget_s) {
            ok = false;
            note = "runtime " + fmt(secs) + " s exceeds budget " + fmt(e.budget_s) + " s";
        }
        std::printf("[%s] criterion %d: %s (%.2f s) -- %s\n", ok ? "PASS" : "FAIL", e.id, e.name, secs,
                    note.c_str());
        if (!ok) ++failures;
    }
    if (failures)
        std::printf("%d criterion(s) FAILED\n", failures);
    else
        std::printf("all 8 criteria passed\n");
    return failures == 0 ? 0 : 1;
}

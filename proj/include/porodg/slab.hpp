#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "porodg/assembly.hpp"
#include "porodg/fixed_stress.hpp"
#include "porodg/gmres.hpp"
#include "porodg/schur.hpp"
#include "porodg/time_basis.hpp"

namespace porodg {

/// Coefficient vectors (u^j, q^j, p^j), j = 0..r, of one time slab. The
/// basis is nodal at the right-Radau points, so the last component is the
/// trace at t_n and feeds the next slab's jump term.
struct SlabState {
    std::vector<FieldVecs> comps;

    const FieldVecs& end_trace() const { return comps.back(); }
};

/// One slab problem (G_hat (x) D + tau M_hat (x) K) X = R, with
/// R_i = tau w_i b(t_i) + phi_i(0) D x_prev. The jump data x_prev enters
/// only through the fields D touches (u and p).
struct SlabSystem {
    const SpatialOperators* ops = nullptr;
    const TimeBasis* basis = nullptr;
    const SchurForm* schur = nullptr;
    double tau = 0.0;
    std::vector<Eigen::VectorXd> rhs;  // stacked (u,q,p) per time index
    Eigen::VectorXd jump_u, jump_p;

    int n_total() const { return ops->n_total(); }
};

inline Eigen::VectorXd stack_fields(const SpatialOperators& ops, const FieldVecs& f) {
    Eigen::VectorXd x(ops.n_total());
    x.segment(0, ops.n_u) = f.u;
    x.segment(ops.n_u, ops.n_q) = f.q;
    x.segment(ops.n_u + ops.n_q, ops.n_p) = f.p;
    return x;
}

inline FieldVecs unstack_fields(const SpatialOperators& ops, const Eigen::VectorXd& x) {
    FieldVecs f;
    f.u = x.segment(0, ops.n_u);
    f.q = x.segment(ops.n_u, ops.n_q);
    f.p = x.segment(ops.n_u + ops.n_q, ops.n_p);
    return f;
}

inline SlabSystem build_slab_system(const SpatialOperators& ops, const TimeBasis& basis,
                                    const SchurForm& schur, double tau,
                                    const std::vector<FieldVecs>& nodal_rhs,
                                    const Eigen::VectorXd& jump_u, const Eigen::VectorXd& jump_p) {
    if (static_cast<int>(nodal_rhs.size()) != basis.n_nodes())
        throw std::invalid_argument("build_slab_system: need one rhs per Radau node");
    if (jump_u.size() != ops.n_u || jump_p.size() != ops.n_p)
        throw std::invalid_argument("build_slab_system: jump data dimension mismatch");
    if (!(tau > 0.0)) throw std::invalid_argument("build_slab_system: tau must be positive");

    SlabSystem sys;
    sys.ops = &ops;
    sys.basis = &basis;
    sys.schur = &schur;
    sys.tau = tau;
    sys.jump_u = jump_u;
    sys.jump_p = jump_p;

    const Eigen::VectorXd djump = apply_time_derivative_p(ops, jump_u, jump_p);
    sys.rhs.resize(basis.n_nodes());
    for (int i = 0; i < basis.n_nodes(); ++i) {
        if (nodal_rhs[i].u.size() != ops.n_u || nodal_rhs[i].q.size() != ops.n_q ||
            nodal_rhs[i].p.size() != ops.n_p)
            throw std::invalid_argument("build_slab_system: rhs dimension mismatch");
        Eigen::VectorXd r = tau * basis.weights[i] * stack_fields(ops, nodal_rhs[i]);
        r.segment(ops.n_u + ops.n_q, ops.n_p) += basis.phi_at0[i] * djump;
        sys.rhs[i] = std::move(r);
    }
    return sys;
}

/// Dense stationary operator K: rows (A, 0, -bE | 0, M_q, B | 0, B^T, 0).
inline Eigen::MatrixXd dense_stationary(const SpatialOperators& ops) {
    const int nu = ops.n_u, nq = ops.n_q, np = ops.n_p;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(ops.n_total(), ops.n_total());
    k.block(0, 0, nu, nu) = ops.A.to_dense();
    const Eigen::MatrixXd e = ops.E.to_dense();
    k.block(0, nu + nq, nu, np) = -ops.mat.biot_b * e;
    k.block(nu, nu, nq, nq) = ops.M_q.to_dense();
    const Eigen::MatrixXd b = ops.B.to_dense();
    k.block(nu, nu + nq, nq, np) = b;
    k.block(nu + nq, nu, np, nq) = b.transpose();
    return k;
}

/// Dense time-derivative operator D: only the (negated) mass row,
/// (-b E^T, 0, -(1/M) M_p).
inline Eigen::MatrixXd dense_time_derivative(const SpatialOperators& ops) {
    const int nu = ops.n_u, nq = ops.n_q, np = ops.n_p;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(ops.n_total(), ops.n_total());
    d.block(nu + nq, 0, np, nu) = -ops.mat.biot_b * ops.E.to_dense().transpose();
    d.block(nu + nq, nu + nq, np, np).diagonal() = -(1.0 / ops.mat.biot_m) * ops.m_p_diag;
    return d;
}

struct BlockReport {
    int block_index = 0;
    int block_size = 1;
    int gmres_iterations = 0;  // outer Krylov steps (0 for direct solves)
    int fs_sweeps = 0;         // preconditioner truncation or total solver sweeps
    SolverReport report;
};

enum class BlockSolverKind { direct, gmres_fs };

struct SolveOptions {
    BlockSolverKind block_solver = BlockSolverKind::direct;
    GmresOptions gmres;
    FixedStressConfig fs;
};

/// Per-(tau, ops, basis, schur) solver for the transformed quasi-triangular
/// slab systems. Factorizations are cached across slabs; the transformed
/// diagonal-block solves share no mutable state and depend on one another
/// only through the triangular substitution order.
class SlabSolver {
public:
    SlabSolver(const SpatialOperators& ops, const TimeBasis& basis, const SchurForm& schur, double tau,
               SolveOptions opt)
        : ops_(&ops), basis_(&basis), schur_(&schur), tau_(tau), opt_(opt) {
        const int nb = schur.n_blocks();
        if (opt_.block_solver == BlockSolverKind::direct) {
            const Eigen::MatrixXd kd = dense_stationary(ops);
            const Eigen::MatrixXd dd = dense_time_derivative(ops);
            const int nt = ops.n_total();
            block_lu_.resize(nb);
            for (int g = 0; g < nb; ++g) {
                const int m = schur.block_sizes[g], i0 = schur.block_starts[g];
                Eigen::MatrixXd mat(m * nt, m * nt);
                for (int bi = 0; bi < m; ++bi)
                    for (int bj = 0; bj < m; ++bj) {
                        mat.block(bi * nt, bj * nt, nt, nt) = schur.T(i0 + bi, i0 + bj) * dd;
                        if (bi == bj) mat.block(bi * nt, bj * nt, nt, nt) += tau * kd;
                    }
                block_lu_[g] = std::make_unique<DenseLu>(mat);
            }
        } else {
            a_lu_ = std::make_unique<DenseLu>(ops.A.to_dense());
            const double stab = opt_.fs.resolve_stab(ops.mat);
            fs_block_.resize(nb);
            fs_pre_.resize(nb);
            for (int g = 0; g < nb; ++g) {
                const int m = schur.block_sizes[g], i0 = schur.block_starts[g];
                const Eigen::MatrixXd theta = schur.T.block(i0, i0, m, m);
                fs_block_[g] = std::make_unique<FixedStressSolver>(ops, theta, Eigen::VectorXd::Ones(m),
                                                                   tau, stab, a_lu_.get());
                // Per-time-component preconditioner; 2x2 blocks are
                // standardized, so one lambda serves both components.
                Eigen::MatrixXd lam(1, 1);
                lam << theta(0, 0);
                fs_pre_[g] = std::make_unique<FixedStressSolver>(ops, lam, Eigen::VectorXd::Ones(1), tau,
                                                                 stab, a_lu_.get());
            }
        }
    }

    double tau() const { return tau_; }

    /// Transform to the quasi-triangular form, back-substitute through the
    /// C couplings (time-derivative contributions only), solve each 1x1 /
    /// 2x2 diagonal block, and transform back.
    std::pair<SlabState, std::vector<BlockReport>> solve(const SlabSystem& sys) const {
        const SchurForm& s = *schur_;
        const TimeBasis& basis = *basis_;
        const int n = basis.n_nodes(), nt = ops_->n_total();
        const int nu = ops_->n_u, nq = ops_->n_q, np = ops_->n_p;

        // S = (Q^T (x) I) M_hat^{-1} R
        std::vector<Eigen::VectorXd> shat(n, Eigen::VectorXd::Zero(nt));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) shat[i] += s.Q(j, i) * (sys.rhs[j] / basis.weights[j]);

        std::vector<Eigen::VectorXd> y(n);
        std::vector<Eigen::VectorXd> dp(n);  // D applied to solved components (p-rows)
        std::vector<BlockReport> reports;

        for (int g = s.n_blocks() - 1; g >= 0; --g) {
            const int m = s.block_sizes[g], i0 = s.block_starts[g];
            Eigen::VectorXd rhs(m * nt);
            for (int bi = 0; bi < m; ++bi) {
                Eigen::VectorXd r = shat[i0 + bi];
                for (int j = i0 + m; j < n; ++j)
                    if (s.T(i0 + bi, j) != 0.0)
                        r.segment(nu + nq, np) -= s.T(i0 + bi, j) * dp[j];
                rhs.segment(bi * nt, nt) = r;
            }

            BlockReport br;
            br.block_index = g;
            br.block_size = m;
            Eigen::VectorXd sol;
            if (opt_.block_solver == BlockSolverKind::direct) {
                sol = block_lu_[g]->solve(rhs);
                br.report.converged = true;
                br.report.iterations = 0;
                br.report.residual_history = {
                    (rhs - apply_group(g, sol)).norm() / std::max(rhs.norm(), 1e-300)};
                br.report.final_relative_residual = br.report.residual_history.back();
            } else {
                const FixedStressSolver& fsb = *fs_block_[g];
                const FixedStressSolver& fsp = *fs_pre_[g];
                const int sweeps = opt_.fs.truncation_sweeps;
                auto op = [&](const Eigen::VectorXd& v) { return fsb.apply_block(v); };
                auto pre = [&](const Eigen::VectorXd& v) {
                    Eigen::VectorXd z(v.size());
                    for (int bi = 0; bi < m; ++bi)
                        z.segment(bi * nt, nt) = fsp.precondition(v.segment(bi * nt, nt), sweeps);
                    return z;
                };
                auto [x, rep] = gmres(op, pre, rhs, opt_.gmres);
                if (!rep.converged)
                    throw SolverError("slab block " + std::to_string(g) + ": GMRES did not converge (rel res " +
                                      std::to_string(rep.final_relative_residual) + ")");
                sol = std::move(x);
                br.gmres_iterations = rep.iterations;
                br.fs_sweeps = sweeps;
                br.report = std::move(rep);
            }

            for (int bi = 0; bi < m; ++bi) {
                y[i0 + bi] = sol.segment(bi * nt, nt);
                dp[i0 + bi] =
                    apply_time_derivative_p(*ops_, y[i0 + bi].segment(0, nu), y[i0 + bi].segment(nu + nq, np));
            }
            reports.push_back(std::move(br));
        }

        // X = (Q (x) I) Y
        SlabState state;
        state.comps.resize(n);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd xi = Eigen::VectorXd::Zero(nt);
            for (int j = 0; j < n; ++j) xi += s.Q(i, j) * y[j];
            state.comps[i] = unstack_fields(*ops_, xi);
        }
        std::reverse(reports.begin(), reports.end());
        return {std::move(state), std::move(reports)};
    }

    /// Operator of transformed diagonal group g (for residual checks).
    Eigen::VectorXd apply_group(int g, const Eigen::VectorXd& x) const {
        const int m = schur_->block_sizes[g], i0 = schur_->block_starts[g];
        const Eigen::MatrixXd theta = schur_->T.block(i0, i0, m, m);
        return apply_block_operator(*ops_, theta, Eigen::VectorXd::Ones(m), tau_, x);
    }

private:
    const SpatialOperators* ops_;
    const TimeBasis* basis_;
    const SchurForm* schur_;
    double tau_;
    SolveOptions opt_;
    std::vector<std::unique_ptr<DenseLu>> block_lu_;
    std::unique_ptr<DenseLu> a_lu_;
    std::vector<std::unique_ptr<FixedStressSolver>> fs_block_;
    std::vector<std::unique_ptr<FixedStressSolver>> fs_pre_;
};

/// Convenience one-shot monolithic solve of a single slab system.
inline std::pair<SlabState, std::vector<BlockReport>> solve_slab_monolithic(const SlabSystem& sys,
                                                                            const SolveOptions& opt) {
    SlabSolver solver(*sys.ops, *sys.basis, *sys.schur, sys.tau, opt);
    return solver.solve(sys);
}

struct MassResidual {
    Eigen::VectorXd residual;  // per cell, absolute value
    double scale = 0.0;        // max over cells of the constituent magnitudes
};

/// Discrete local mass balance of a converged slab: for each cell, the
/// mass-balance rows (time-integrated storage change + net face flux -
/// integrated source) summed over the time test functions. For an exactly
/// solved slab this vanishes to solver precision.
inline MassResidual local_mass_residual(const SlabSystem& sys, const SlabState& state) {
    const SpatialOperators& ops = *sys.ops;
    const TimeBasis& basis = *sys.basis;
    const int n = basis.n_nodes(), np = ops.n_p;

    std::vector<Eigen::VectorXd> dp(n), kp(n);
    for (int j = 0; j < n; ++j) {
        dp[j] = apply_time_derivative_p(ops, state.comps[j].u, state.comps[j].p);
        kp[j] = ops.B.apply_transpose(state.comps[j].q);
    }

    MassResidual out;
    out.residual = Eigen::VectorXd::Zero(np);
    Eigen::VectorXd scale = Eigen::VectorXd::Zero(np);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd storage = Eigen::VectorXd::Zero(np);
        for (int j = 0; j < n; ++j)
            if (basis.G_hat(i, j) != 0.0) storage += basis.G_hat(i, j) * dp[j];
        const Eigen::VectorXd flux = sys.tau * basis.weights[i] * kp[i];
        const Eigen::VectorXd src = sys.rhs[i].segment(ops.n_u + ops.n_q, np);
        out.residual += storage + flux - src;
        scale += storage.cwiseAbs() + flux.cwiseAbs() + src.cwiseAbs();
    }
    out.residual = out.residual.cwiseAbs();
    out.scale = scale.maxCoeff();
    return out;
}

} // namespace porodg

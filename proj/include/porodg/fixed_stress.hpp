#pragma once

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "porodg/assembly.hpp"
#include "porodg/dense.hpp"
#include "porodg/errors.hpp"
#include "porodg/gmres.hpp"

namespace porodg {

struct FixedStressConfig {
    double stab = -1.0;  // < 0: use the classical default b^2 / K_dr
    double tol = 1e-10;
    int max_sweeps = 200;
    int truncation_sweeps = 1;  // sweeps per preconditioner application

    double resolve_stab(const MaterialParameters& m) const {
        const double s = stab < 0.0 ? m.biot_b * m.biot_b / m.k_dr : stab;
        if (!(s >= 0.0)) throw std::invalid_argument("fixed-stress: stabilization must be nonnegative");
        return s;
    }

    void validate() const {
        if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("fixed-stress: tol must be in (0,1)");
        if (max_sweeps < 1 || truncation_sweeps < 1)
            throw std::invalid_argument("fixed-stress: sweep counts must be >= 1");
    }
};

/// Action of the block operator Theta (x) D + tau diag(kappa) (x) K on a
/// stacked vector [u_0 q_0 p_0 | u_1 q_1 p_1 | ...].
inline Eigen::VectorXd apply_block_operator(const SpatialOperators& ops, const Eigen::MatrixXd& theta,
                                            const Eigen::VectorXd& kappa, double tau,
                                            const Eigen::VectorXd& x) {
    const int m = static_cast<int>(theta.rows());
    const int nt = ops.n_total(), nu = ops.n_u, nq = ops.n_q, np = ops.n_p;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m * nt);
    std::vector<Eigen::VectorXd> dp(m);
    for (int j = 0; j < m; ++j)
        dp[j] = apply_time_derivative_p(ops, x.segment(j * nt, nu), x.segment(j * nt + nu + nq, np));
    for (int i = 0; i < m; ++i) {
        const auto u = x.segment(i * nt, nu);
        const auto q = x.segment(i * nt + nu, nq);
        const auto p = x.segment(i * nt + nu + nq, np);
        const double w = tau * kappa[i];
        y.segment(i * nt, nu) = w * (ops.A.apply(u) - ops.mat.biot_b * ops.E.apply(p));
        y.segment(i * nt + nu, nq) = w * (ops.M_q.apply(q) + ops.B.apply(p));
        Eigen::VectorXd prow = w * ops.B.apply_transpose(q);
        for (int j = 0; j < m; ++j)
            if (theta(i, j) != 0.0) prow += theta(i, j) * dp[j];
        y.segment(i * nt + nu + nq, np) = prow;
    }
    return y;
}

/// Fixed-stress solver for block systems of the form
///
///   [ Theta (x) D  +  tau diag(kappa) (x) K ] X = R
///
/// where D and K are the assembled time-derivative and stationary Biot
/// operators, Theta is a small time-weight matrix (a single lambda_{j,j}
/// for an L_j-type block, a 2x2 real-Schur block, or G_hat for the full
/// untransformed slab) and kappa the matching stationary weights. One sweep
/// solves the flow problem for (q, p) with the volumetric-stress
/// contribution of the previous displacement iterate frozen (storage
/// augmented by stab * M_p under the same Theta weighting), then the
/// deformation problem with the new pressure frozen. Layout of X:
/// components stacked as [u_0 q_0 p_0 | u_1 q_1 p_1 | ...].
class FixedStressSolver {
public:
    FixedStressSolver(const SpatialOperators& ops, Eigen::MatrixXd theta, Eigen::VectorXd kappa,
                      double tau, double stab, const DenseLu* shared_a_lu = nullptr)
        : ops_(&ops),
          theta_(std::move(theta)),
          kappa_(std::move(kappa)),
          tau_(tau),
          stab_(stab),
          m_(static_cast<int>(theta_.rows())) {
        if (theta_.rows() != theta_.cols() || kappa_.size() != m_)
            throw std::invalid_argument("FixedStressSolver: weight dimensions mismatch");
        if (!(tau_ > 0.0)) throw std::invalid_argument("FixedStressSolver: tau must be positive");

        if (shared_a_lu) {
            a_lu_ = shared_a_lu;
        } else {
            owned_a_lu_ = std::make_shared<DenseLu>(ops.A.to_dense());
            a_lu_ = owned_a_lu_.get();
        }
        build_flow_lu();
    }

    int n_components() const { return m_; }
    int block_size() const { return m_ * ops_->n_total(); }
    const SpatialOperators& ops() const { return *ops_; }
    const DenseLu& a_lu() const { return *a_lu_; }

    /// Action of the block operator Theta (x) D + tau diag(kappa) (x) K.
    Eigen::VectorXd apply_block(const Eigen::VectorXd& x) const {
        return apply_block_operator(*ops_, theta_, kappa_, tau_, x);
    }

    /// One flow-then-mechanics sweep from iterate x.
    Eigen::VectorXd sweep(const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) const {
        const int nt = ops_->n_total(), nu = ops_->n_u, nq = ops_->n_q, np = ops_->n_p;
        const double b = ops_->mat.biot_b;

        // Flow right-hand side with the sigma_v lag of the previous iterate
        // moved to the right: + Theta_{ij} (b E^T u_j^old - stab M_p p_j^old).
        Eigen::VectorXd fr(m_ * (nq + np));
        for (int i = 0; i < m_; ++i) {
            fr.segment(i * nq, nq) = rhs.segment(i * nt + nu, nq);
            Eigen::VectorXd pr = rhs.segment(i * nt + nu + nq, np);
            for (int j = 0; j < m_; ++j) {
                if (theta_(i, j) == 0.0) continue;
                pr += theta_(i, j) * (b * ops_->E.apply_transpose(x.segment(j * nt, nu)) -
                                      stab_ * ops_->m_p_diag.cwiseProduct(x.segment(j * nt + nu + nq, np)));
            }
            fr.segment(m_ * nq + i * np, np) = pr;
        }
        const Eigen::VectorXd fsol = flow_lu_.solve(fr);

        Eigen::VectorXd xn(m_ * nt);
        for (int i = 0; i < m_; ++i) {
            const auto p_new = fsol.segment(m_ * nq + i * np, np);
            const auto q_new = fsol.segment(i * nq, nq);
            const double w = tau_ * kappa_[i];
            const Eigen::VectorXd mech_rhs = rhs.segment(i * nt, nu) / w + b * ops_->E.apply(p_new);
            xn.segment(i * nt, nu) = a_lu_->solve(mech_rhs);
            xn.segment(i * nt + nu, nq) = q_new;
            xn.segment(i * nt + nu + nq, np) = p_new;
        }
        return xn;
    }

    /// Iterate sweeps until the true residual of the coupled block drops
    /// below cfg.tol relative to ||rhs||. An initial guess (e.g. the
    /// previous slab's state) may be supplied; the default is zero.
    std::pair<Eigen::VectorXd, SolverReport> solve(const Eigen::VectorXd& rhs,
                                                   const FixedStressConfig& cfg,
                                                   const Eigen::VectorXd& x0 = {}) const {
        cfg.validate();
        SolverReport rep;
        const double rnorm = rhs.norm();
        Eigen::VectorXd x = x0.size() ? x0 : Eigen::VectorXd::Zero(block_size());
        if (x.size() != block_size()) throw std::invalid_argument("fixed-stress: bad initial guess size");
        if (rnorm <= 1e-14) {
            rep.converged = true;
            rep.residual_history = {(rhs - apply_block(x)).norm()};
            rep.final_relative_residual = 0.0;
            return {Eigen::VectorXd::Zero(block_size()), rep};
        }
        double res = (rhs - apply_block(x)).norm();
        rep.residual_history.push_back(res);
        for (int k = 0; k < cfg.max_sweeps; ++k) {
            x = sweep(x, rhs);
            ++rep.iterations;
            res = (rhs - apply_block(x)).norm();
            rep.residual_history.push_back(res);
            if (res / rnorm <= cfg.tol) {
                rep.converged = true;
                break;
            }
        }
        rep.final_relative_residual = res / rnorm;
        return {x, rep};
    }

    /// Truncated preconditioner: exactly `sweeps` sweeps from the zero
    /// initial guess with exact inner solves — a fixed linear map of the
    /// residual, safe inside plain GMRES.
    Eigen::VectorXd precondition(const Eigen::VectorXd& residual, int sweeps) const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(block_size());
        for (int k = 0; k < sweeps; ++k) x = sweep(x, residual);
        return x;
    }

private:
    void build_flow_lu() {
        const int nq = ops_->n_q, np = ops_->n_p;
        const double inv_m = 1.0 / ops_->mat.biot_m;
        Eigen::MatrixXd f = Eigen::MatrixXd::Zero(m_ * (nq + np), m_ * (nq + np));
        const Eigen::MatrixXd mq = ops_->M_q.to_dense();
        const Eigen::MatrixXd bm = ops_->B.to_dense();
        for (int i = 0; i < m_; ++i) {
            const double w = tau_ * kappa_[i];
            f.block(i * nq, i * nq, nq, nq) = w * mq;
            f.block(i * nq, m_ * nq + i * np, nq, np) = w * bm;
            f.block(m_ * nq + i * np, i * nq, np, nq) = w * bm.transpose();
            for (int j = 0; j < m_; ++j)
                if (theta_(i, j) != 0.0)
                    f.block(m_ * nq + i * np, m_ * nq + j * np, np, np).diagonal() -=
                        theta_(i, j) * (inv_m + stab_) * ops_->m_p_diag;
        }
        flow_lu_.factor(f);
    }

    const SpatialOperators* ops_;
    Eigen::MatrixXd theta_;
    Eigen::VectorXd kappa_;
    double tau_;
    double stab_;
    int m_;
    const DenseLu* a_lu_ = nullptr;
    std::shared_ptr<DenseLu> owned_a_lu_;
    DenseLu flow_lu_;
};

/// Spec-level entry point: fixed-stress solve of one L_j-type block
/// (lambda D + tau K) x = rhs.
inline std::pair<Eigen::VectorXd, SolverReport> fixed_stress_solve(const SpatialOperators& ops,
                                                                   double lambda, double tau,
                                                                   const Eigen::VectorXd& rhs,
                                                                   const FixedStressConfig& cfg,
                                                                   const Eigen::VectorXd& x0 = {}) {
    Eigen::MatrixXd theta(1, 1);
    theta << lambda;
    FixedStressSolver fs(ops, theta, Eigen::VectorXd::Ones(1), tau, cfg.resolve_stab(ops.mat));
    return fs.solve(rhs, cfg, x0);
}

/// Spec-level entry point: truncated fixed-stress preconditioner applied
/// to one residual of an L_j-type block.
inline Eigen::VectorXd apply_fs_preconditioner(const SpatialOperators& ops, double lambda, double tau,
                                               const Eigen::VectorXd& residual,
                                               const FixedStressConfig& cfg) {
    cfg.validate();
    Eigen::MatrixXd theta(1, 1);
    theta << lambda;
    FixedStressSolver fs(ops, theta, Eigen::VectorXd::Ones(1), tau, cfg.resolve_stab(ops.mat));
    return fs.precondition(residual, cfg.truncation_sweeps);
}

} // namespace porodg

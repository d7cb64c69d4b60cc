#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "porodg/errors.hpp"

namespace porodg {

struct SolverReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;  // true-residual norms, entry 0 is the initial residual
    double final_relative_residual = std::numeric_limits<double>::quiet_NaN();
};

using LinOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct GmresOptions {
    double tol = 1e-10;  // relative true residual
    int restart = 100;
    int max_iter = 400;
};

inline LinOp identity_op() {
    return [](const Eigen::VectorXd& v) { return v; };
}

namespace detail {

/// Right-preconditioned GMRES core. With `flexible` the preconditioned
/// Krylov directions are stored per iteration (FGMRES), which tolerates a
/// preconditioner that changes between applications; the plain variant
/// requires apply_precond to be a fixed linear map.
inline std::pair<Eigen::VectorXd, SolverReport> gmres_impl(const LinOp& apply_op,
                                                           const LinOp& apply_precond,
                                                           const Eigen::VectorXd& b,
                                                           const GmresOptions& opt,
                                                           bool flexible) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;

    if (!(opt.tol > 0.0 && opt.tol < 1.0)) throw std::invalid_argument("gmres: tol must be in (0,1)");
    if (opt.restart < 1 || opt.max_iter < 1) throw std::invalid_argument("gmres: bad iteration limits");

    const int n = static_cast<int>(b.size());
    SolverReport rep;

    const double bnorm = b.norm();
    // Tie-break for a zero right-hand side: absolute tolerance.
    if (bnorm <= 1e-14) {
        rep.converged = true;
        rep.iterations = 0;
        rep.residual_history = {bnorm};
        rep.final_relative_residual = 0.0;
        return {VectorXd::Zero(n), rep};
    }

    VectorXd x = VectorXd::Zero(n);
    double true_res = bnorm;
    rep.residual_history.push_back(true_res);

    auto record = [&](const VectorXd& cand) {
        true_res = (b - apply_op(cand)).norm();
        rep.residual_history.push_back(true_res);
        return true_res / bnorm <= opt.tol;
    };

    int total_iters = 0;
    while (total_iters < opt.max_iter) {
        VectorXd r = b - apply_op(x);
        const double beta = r.norm();
        if (beta / bnorm <= opt.tol) break;

        const int m = std::min(opt.restart, opt.max_iter - total_iters);
        MatrixXd v(n, m + 1);
        MatrixXd z;  // flexible only
        if (flexible) z.resize(n, m);
        MatrixXd h = MatrixXd::Zero(m + 1, m);
        v.col(0) = r / beta;

        int k = 0;
        bool done = false;
        for (; k < m && !done; ++k) {
            VectorXd zk = apply_precond(v.col(k));
            if (flexible) z.col(k) = zk;
            VectorXd w = apply_op(zk);

            // Modified Gram-Schmidt with one reorthogonalization pass.
            for (int pass = 0; pass < 2; ++pass) {
                for (int i = 0; i <= k; ++i) {
                    const double c = v.col(i).dot(w);
                    h(i, k) += c;
                    w -= c * v.col(i);
                }
            }
            h(k + 1, k) = w.norm();
            const bool breakdown = h(k + 1, k) <= 1e-14 * h.col(k).norm();
            if (!breakdown) v.col(k + 1) = w / h(k + 1, k);

            ++total_iters;

            // Candidate solution from the current least-squares problem,
            // judged by the recomputed true residual.
            const Eigen::VectorXd e1 = beta * VectorXd::Unit(k + 2, 0);
            const VectorXd y = h.topLeftCorner(k + 2, k + 1).colPivHouseholderQr().solve(e1);
            VectorXd cand;
            if (flexible)
                cand = x + z.leftCols(k + 1) * y;
            else
                cand = x + apply_precond(v.leftCols(k + 1) * y);

            if (record(cand)) {
                x = cand;
                rep.converged = true;
                done = true;
            } else if (breakdown) {
                // Happy breakdown: the Krylov space is invariant, nothing
                // further can be gained in this cycle.
                x = cand;
                done = true;
            } else if (k == m - 1 || total_iters >= opt.max_iter) {
                x = cand;
                done = true;
            }
        }
        if (rep.converged) break;
    }

    rep.iterations = total_iters;
    rep.final_relative_residual = true_res / bnorm;
    if (!rep.converged) rep.converged = rep.final_relative_residual <= opt.tol;
    return {x, rep};
}

} // namespace detail

/// Right-preconditioned GMRES with a fixed linear preconditioner; pass
/// identity_op() to run unpreconditioned.
inline std::pair<Eigen::VectorXd, SolverReport> gmres(const LinOp& apply_op,
                                                      const LinOp& apply_precond,
                                                      const Eigen::VectorXd& b,
                                                      const GmresOptions& opt = {}) {
    return detail::gmres_impl(apply_op, apply_precond, b, opt, /*flexible=*/false);
}

/// FGMRES; same interface, safe for inexact inner solves.
inline std::pair<Eigen::VectorXd, SolverReport> gmres_flexible(const LinOp& apply_op,
                                                               const LinOp& apply_precond,
                                                               const Eigen::VectorXd& b,
                                                               const GmresOptions& opt = {}) {
    return detail::gmres_impl(apply_op, apply_precond, b, opt, /*flexible=*/true);
}

} // namespace porodg

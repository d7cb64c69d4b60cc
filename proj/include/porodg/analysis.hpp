#pragma once

#include <array>
#include <cmath>

#include "porodg/march.hpp"

namespace porodg {

/// Closed-form solution handle used for error norms.
struct ExactSolution {
    bool available = false;
    ScalarFieldT p;
    VectorFieldT u;
    VectorFieldT q;
};

inline std::array<double, 2> eval_displacement(const Mesh& mesh, const DofMaps& dofs,
                                               const Eigen::VectorXd& u, int c, double x, double y) {
    const Cell& cell = mesh.cells[c];
    const auto rp = shapes::to_ref(cell, x, y);
    std::array<double, 2> v = {0.0, 0.0};
    for (int a = 0; a < 4; ++a) {
        const double nv = shapes::n(a, rp[0], rp[1]);
        v[0] += nv * u[dofs.u_dof(c, a, 0)];
        v[1] += nv * u[dofs.u_dof(c, a, 1)];
    }
    return v;
}

inline std::array<double, 2> eval_flux(const Mesh& mesh, const DofMaps& dofs, const Eigen::VectorXd& q,
                                       int c, double x, double y) {
    const Cell& cell = mesh.cells[c];
    const auto rp = shapes::to_ref(cell, x, y);
    const auto cf = mesh.cell_faces(c);
    std::array<double, 4> sgn{};
    for (int k = 0; k < 4; ++k) {
        const Face& f = mesh.faces[cf[k]];
        sgn[k] = f.orientation == FaceOrientation::vertical ? f.nx : f.ny;
    }
    return {sgn[0] * (1.0 - rp[0]) * q[cf[0]] + sgn[1] * rp[0] * q[cf[1]],
            sgn[2] * (1.0 - rp[1]) * q[cf[2]] + sgn[3] * rp[1] * q[cf[3]]};
}

struct FieldErrors {
    double p = 0.0, u = 0.0, q = 0.0;
};

/// L2(L2) errors of a trajectory against the analytic solution, integrated
/// with a Gauss rule in time per slab and the data rule in space per cell.
inline FieldErrors l2l2_error_vs_exact(const Mesh& mesh, const DofMaps& dofs, const Trajectory& traj,
                                       const ExactSolution& exact) {
    const QuadratureRule tq = gauss_legendre(5);
    const QuadratureRule sq = gauss_legendre(kDataQuadOrder);
    FieldErrors e2;
    for (int n = 0; n < traj.partition.n_slabs(); ++n) {
        const double tau = traj.partition.slab_length(n), t0 = traj.partition.t_begin(n);
        const SlabState& st = traj.slabs[n].state;
        for (std::size_t k = 0; k < tq.points.size(); ++k) {
            const double t = t0 + tq.points[k] * tau;
            const double wt = tq.weights[k] * tau;
            const Eigen::VectorXd phi = traj.basis.eval(tq.points[k]);
            FieldVecs f;
            f.u = Eigen::VectorXd::Zero(dofs.n_u);
            f.q = Eigen::VectorXd::Zero(dofs.n_q);
            f.p = Eigen::VectorXd::Zero(dofs.n_p);
            for (int j = 0; j < traj.basis.n_nodes(); ++j) {
                f.u += phi[j] * st.comps[j].u;
                f.q += phi[j] * st.comps[j].q;
                f.p += phi[j] * st.comps[j].p;
            }
            double ep = 0.0, eu = 0.0, eq = 0.0;
            for (int c = 0; c < mesh.n_cells(); ++c) {
                const Cell& cell = mesh.cells[c];
                for (std::size_t i = 0; i < sq.points.size(); ++i)
                    for (std::size_t j = 0; j < sq.points.size(); ++j) {
                        const double x = cell.x0 + sq.points[i] * cell.hx;
                        const double y = cell.y0 + sq.points[j] * cell.hy;
                        const double w = sq.weights[i] * sq.weights[j] * cell.area();
                        const double dp = f.p[c] - exact.p(x, y, t);
                        const auto uh = eval_displacement(mesh, dofs, f.u, c, x, y);
                        const auto ue = exact.u(x, y, t);
                        const auto qh = eval_flux(mesh, dofs, f.q, c, x, y);
                        const auto qe = exact.q(x, y, t);
                        ep += w * dp * dp;
                        eu += w * ((uh[0] - ue[0]) * (uh[0] - ue[0]) + (uh[1] - ue[1]) * (uh[1] - ue[1]));
                        eq += w * ((qh[0] - qe[0]) * (qh[0] - qe[0]) + (qh[1] - qe[1]) * (qh[1] - qe[1]));
                    }
            }
            e2.p += wt * ep;
            e2.u += wt * eu;
            e2.q += wt * eq;
        }
    }
    return {std::sqrt(e2.p), std::sqrt(e2.u), std::sqrt(e2.q)};
}

/// Discrete fields of a trajectory evaluated at an arbitrary time (the slab
/// containing t, limit from the left at slab ends).
inline FieldVecs eval_trajectory(const Trajectory& traj, const DofMaps& dofs, double t) {
    const auto& tp = traj.partition.t_points;
    int n = static_cast<int>(std::upper_bound(tp.begin(), tp.end(), t) - tp.begin()) - 1;
    if (n >= traj.partition.n_slabs()) n = traj.partition.n_slabs() - 1;
    if (n < 0) n = 0;
    const double s = (t - traj.partition.t_begin(n)) / traj.partition.slab_length(n);
    const Eigen::VectorXd phi = traj.basis.eval(std::min(1.0, std::max(0.0, s)));
    const SlabState& st = traj.slabs[n].state;
    FieldVecs f;
    f.u = Eigen::VectorXd::Zero(dofs.n_u);
    f.q = Eigen::VectorXd::Zero(dofs.n_q);
    f.p = Eigen::VectorXd::Zero(dofs.n_p);
    for (int j = 0; j < traj.basis.n_nodes(); ++j) {
        f.u += phi[j] * st.comps[j].u;
        f.q += phi[j] * st.comps[j].q;
        f.p += phi[j] * st.comps[j].p;
    }
    return f;
}

/// L2(L2) distance between two trajectories on the same mesh (used to
/// isolate the temporal error against a fine reference run).
inline FieldErrors l2l2_trajectory_diff(const Mesh& mesh, const DofMaps& dofs, const Trajectory& a,
                                        const Trajectory& b) {
    const QuadratureRule tq = gauss_legendre(5);
    const QuadratureRule sq = gauss_legendre(2);
    FieldErrors e2;
    for (int n = 0; n < a.partition.n_slabs(); ++n) {
        const double tau = a.partition.slab_length(n), t0 = a.partition.t_begin(n);
        for (std::size_t k = 0; k < tq.points.size(); ++k) {
            const double t = t0 + tq.points[k] * tau;
            const double wt = tq.weights[k] * tau;
            const FieldVecs fa = eval_trajectory(a, dofs, t);
            const FieldVecs fb = eval_trajectory(b, dofs, t);
            const Eigen::VectorXd du = fa.u - fb.u, dq = fa.q - fb.q, dp = fa.p - fb.p;
            double ep = 0.0, eu = 0.0, eq = 0.0;
            for (int c = 0; c < mesh.n_cells(); ++c) {
                const Cell& cell = mesh.cells[c];
                ep += cell.area() * dp[c] * dp[c];
                for (std::size_t i = 0; i < sq.points.size(); ++i)
                    for (std::size_t j = 0; j < sq.points.size(); ++j) {
                        const double x = cell.x0 + sq.points[i] * cell.hx;
                        const double y = cell.y0 + sq.points[j] * cell.hy;
                        const double w = sq.weights[i] * sq.weights[j] * cell.area();
                        const auto uh = eval_displacement(mesh, dofs, du, c, x, y);
                        const auto qh = eval_flux(mesh, dofs, dq, c, x, y);
                        eu += w * (uh[0] * uh[0] + uh[1] * uh[1]);
                        eq += w * (qh[0] * qh[0] + qh[1] * qh[1]);
                    }
            }
            e2.p += wt * ep;
            e2.u += wt * eu;
            e2.q += wt * eq;
        }
    }
    return {std::sqrt(e2.p), std::sqrt(e2.u), std::sqrt(e2.q)};
}

} // namespace porodg

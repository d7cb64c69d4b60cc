#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "porodg/boundary.hpp"
#include "porodg/dofs.hpp"
#include "porodg/material.hpp"
#include "porodg/mesh.hpp"
#include "porodg/quadrature.hpp"
#include "porodg/sparse.hpp"

namespace porodg {

struct FieldVecs {
    Eigen::VectorXd u, q, p;
};

/// Volume data of one run: momentum right-hand side, Darcy right-hand side
/// (rho_f g for physical problems) and the mass-balance source f.
struct VolumeData {
    VectorFieldT momentum;
    VectorFieldT darcy;
    ScalarFieldT mass;
};

/// Assembled spatial blocks of the coupled system. The rows are
///   momentum:      A u            - b E p   = b_u
///   Darcy:             M_q q      +   B p   = b_q
///   mass (negated): -b E^T du/dt - (1/M) M_p dp/dt + B^T q = b_p
/// so that B^T and E^T in the mass row are the exact transposes of the
/// stored B and E (applied through the same entries). Essential flux
/// conditions are eliminated symmetrically; the dropped couplings are kept
/// in mq_bc / b_bc for right-hand-side corrections.
struct SpatialOperators {
    SparseMatrix A, M_q, B, E, M_p;
    Eigen::VectorXd m_p_diag;
    double penalty = 0.0;  // dimensionless SIPG coefficient gamma
    MaterialParameters mat;
    BoundarySpec bc;
    std::vector<char> q_constrained;
    std::vector<Triplet> mq_bc;  // (free row, constrained col, value) dropped from M_q
    std::vector<Triplet> b_bc;   // (constrained face, cell, value) dropped from B
    Eigen::VectorXd u0_coeffs, p0_coeffs, sigma_v0_cells;
    Eigen::VectorXd rhs_ref_u;  // A u0 - b E p0 - E sigma_v0, time-independent
    int n_u = 0, n_q = 0, n_p = 0;

    int n_total() const { return n_u + n_q + n_p; }
};

namespace shapes {

// Bilinear shape functions on the reference square, node order
// (0,0), (1,0), (0,1), (1,1).
inline double n(int a, double xi, double eta) {
    switch (a) {
        case 0: return (1.0 - xi) * (1.0 - eta);
        case 1: return xi * (1.0 - eta);
        case 2: return (1.0 - xi) * eta;
        default: return xi * eta;
    }
}
inline double dn_dxi(int a, double eta) {
    switch (a) {
        case 0: return -(1.0 - eta);
        case 1: return 1.0 - eta;
        case 2: return -eta;
        default: return eta;
    }
}
inline double dn_deta(int a, double xi) {
    switch (a) {
        case 0: return -(1.0 - xi);
        case 1: return -xi;
        case 2: return 1.0 - xi;
        default: return xi;
    }
}

/// Physical gradient of shape a at reference point (xi, eta) of a cell.
inline std::array<double, 2> grad(const Cell& c, int a, double xi, double eta) {
    return {dn_dxi(a, eta) / c.hx, dn_deta(a, xi) / c.hy};
}

/// Reference coordinates of a physical point inside a cell.
inline std::array<double, 2> to_ref(const Cell& c, double x, double y) {
    return {(x - c.x0) / c.hx, (y - c.y0) / c.hy};
}

/// Strain of displacement basis function (node a, component comp).
inline std::array<double, 3> strain(const Cell& c, int a, int comp, double xi, double eta) {
    const auto g = grad(c, a, xi, eta);
    if (comp == 0) return {g[0], 0.0, 0.5 * g[1]};  // exx, eyy, exy
    return {0.0, g[1], 0.5 * g[0]};
}

/// Traction sigma(phi) * n of a displacement basis function.
inline std::array<double, 2> traction(const Cell& c, const MaterialParameters& m, int a, int comp,
                                      double xi, double eta, double nx, double ny) {
    const auto g = grad(c, a, xi, eta);
    const double lam = m.lambda_lame, mu = m.mu_lame;
    double sxx, syy, sxy;
    if (comp == 0) {
        sxx = (2.0 * mu + lam) * g[0];
        syy = lam * g[0];
        sxy = mu * g[1];
    } else {
        sxx = lam * g[1];
        syy = (2.0 * mu + lam) * g[1];
        sxy = mu * g[0];
    }
    return {sxx * nx + sxy * ny, sxy * nx + syy * ny};
}

} // namespace shapes

namespace detail {

/// Local node indices of a cell on one of its faces and the constant
/// reference coordinate across that face.
struct FaceTrace {
    std::array<int, 2> nodes;  // local nodes spanning the face
    bool vertical;
    double fixed_ref;  // xi (vertical) or eta (horizontal) on the face
};

inline FaceTrace face_trace(const Mesh& mesh, int face, int cell) {
    const Face& f = mesh.faces[face];
    const Cell& c = mesh.cells[cell];
    FaceTrace t;
    t.vertical = f.orientation == FaceOrientation::vertical;
    if (t.vertical) {
        const bool left = std::abs(f.x0 - c.x0) < 1e-12 * (c.hx + 1.0);
        t.fixed_ref = left ? 0.0 : 1.0;
        t.nodes = left ? std::array<int, 2>{0, 2} : std::array<int, 2>{1, 3};
    } else {
        const bool bottom = std::abs(f.y0 - c.y0) < 1e-12 * (c.hy + 1.0);
        t.fixed_ref = bottom ? 0.0 : 1.0;
        t.nodes = bottom ? std::array<int, 2>{0, 1} : std::array<int, 2>{2, 3};
    }
    return t;
}

/// Value of shape a of `cell` at arclength parameter s in [0,1] along face.
inline double face_shape(const FaceTrace& t, int a, double s) {
    const double xi = t.vertical ? t.fixed_ref : s;
    const double eta = t.vertical ? s : t.fixed_ref;
    return shapes::n(a, xi, eta);
}

inline std::array<double, 2> face_ref_point(const FaceTrace& t, double s) {
    return t.vertical ? std::array<double, 2>{t.fixed_ref, s} : std::array<double, 2>{s, t.fixed_ref};
}

} // namespace detail

inline double sipg_face_coefficient(const Mesh& mesh, const MaterialParameters& mat, double gamma, int face) {
    const Face& f = mesh.faces[face];
    // Perpendicular cell extent, averaged over the adjacent cells.
    double h = 0.0;
    int cnt = 0;
    for (int c : {f.cell_minus, f.cell_plus}) {
        if (c < 0) continue;
        h += f.orientation == FaceOrientation::vertical ? mesh.cells[c].hx : mesh.cells[c].hy;
        ++cnt;
    }
    h /= cnt;
    return gamma * (mat.lambda_lame + 2.0 * mat.mu_lame) / h;
}

inline Eigen::VectorXd project_p(const Mesh& mesh, const DofMaps& dofs, const ScalarField& f);
inline Eigen::VectorXd project_u(const Mesh& mesh, const DofMaps& dofs, const VectorField& f);

inline SpatialOperators assemble_operators(const Mesh& mesh, const DofMaps& dofs,
                                           const MaterialParameters& mat, double penalty_gamma,
                                           const BoundarySpec& bc) {
    if (!(penalty_gamma > 0.0)) throw std::invalid_argument("assemble_operators: penalty must be positive");
    bc.validate();
    mat.validate();

    SpatialOperators ops;
    ops.penalty = penalty_gamma;
    ops.mat = mat;
    ops.bc = bc;
    ops.n_u = dofs.n_u;
    ops.n_q = dofs.n_q;
    ops.n_p = dofs.n_p;

    const QuadratureRule g2 = gauss_legendre(2);

    // Essential flux dofs.
    ops.q_constrained.assign(dofs.n_q, 0);
    for (int f = 0; f < mesh.n_faces(); ++f) {
        const Face& face = mesh.faces[f];
        if (face.is_boundary() && bc.flow_on(face.tag).kind == FlowBC::Kind::normal_flux)
            ops.q_constrained[f] = 1;
    }

    std::vector<Triplet> ta, tmq, tb, te, tmp;

    // ---- cell contributions -------------------------------------------
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        const double area = cell.area();
        const double lam = mat.lambda_lame, mu = mat.mu_lame;

        // Elasticity volume block, symmetric by construction.
        Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
        Eigen::Matrix<double, 8, 1> div_int = Eigen::Matrix<double, 8, 1>::Zero();
        for (std::size_t qi = 0; qi < g2.points.size(); ++qi)
            for (std::size_t qj = 0; qj < g2.points.size(); ++qj) {
                const double xi = g2.points[qi], eta = g2.points[qj];
                const double w = g2.weights[qi] * g2.weights[qj] * area;
                std::array<std::array<double, 3>, 8> eps;
                for (int l = 0; l < 8; ++l) eps[l] = shapes::strain(cell, l / 2, l % 2, xi, eta);
                for (int l1 = 0; l1 < 8; ++l1) {
                    for (int l2 = 0; l2 <= l1; ++l2) {
                        const auto &e1 = eps[l1], &e2 = eps[l2];
                        const double v = 2.0 * mu * (e1[0] * e2[0] + e1[1] * e2[1] + 2.0 * e1[2] * e2[2]) +
                                         lam * (e1[0] + e1[1]) * (e2[0] + e2[1]);
                        ke(l1, l2) += w * v;
                        if (l2 != l1) ke(l2, l1) += w * v;
                    }
                    div_int[l1] += w * (eps[l1][0] + eps[l1][1]);
                }
            }
        for (int l1 = 0; l1 < 8; ++l1) {
            for (int l2 = 0; l2 < 8; ++l2)
                ta.push_back({dofs.cell_u[c][l1], dofs.cell_u[c][l2], ke(l1, l2)});
            te.push_back({dofs.cell_u[c][l1], dofs.cell_p[c], div_int[l1]});
        }

        // Flux mass and divergence coupling. Local face order {W, E, S, N};
        // the basis of face F restricted to this cell is the hat profile
        // directed along the stored face normal.
        const auto cf = mesh.cell_faces(c);
        const double keff = mat.eta / mat.permeability(c);
        std::array<double, 4> sgn{};  // axis component of the stored normal
        for (int k = 0; k < 4; ++k) {
            const Face& f = mesh.faces[cf[k]];
            sgn[k] = f.orientation == FaceOrientation::vertical ? f.nx : f.ny;
        }
        const double d3 = keff * area / 3.0, d6 = keff * area / 6.0;
        for (int pair = 0; pair < 2; ++pair) {
            const int f0 = cf[2 * pair], f1 = cf[2 * pair + 1];
            const double cross = d6 * sgn[2 * pair] * sgn[2 * pair + 1];
            auto push_mq = [&](int r, int cc, double v) {
                const bool rc = ops.q_constrained[r], cc_c = ops.q_constrained[cc];
                if (rc && r == cc) return;  // diagonal set later
                if (rc) return;             // row replaced by the constraint
                if (cc_c)
                    ops.mq_bc.push_back({r, cc, v});
                else
                    tmq.push_back({r, cc, v});
            };
            push_mq(f0, f0, d3);
            push_mq(f1, f1, d3);
            push_mq(f0, f1, cross);
            push_mq(f1, f0, cross);
        }

        // B[F, K] = -s_out * |F|  (so that B p realizes -(p, div w)).
        for (int k = 0; k < 4; ++k) {
            const int f = cf[k];
            const double sout = face_outward_sign(mesh, f, c);
            const double v = -sout * mesh.faces[f].measure;
            if (ops.q_constrained[f])
                ops.b_bc.push_back({f, dofs.cell_p[c], v});
            else
                tb.push_back({f, dofs.cell_p[c], v});
        }

        tmp.push_back({dofs.cell_p[c], dofs.cell_p[c], area});
    }
    for (int f = 0; f < dofs.n_q; ++f)
        if (ops.q_constrained[f]) tmq.push_back({f, f, 1.0});

    // ---- face contributions -------------------------------------------
    for (int f = 0; f < mesh.n_faces(); ++f) {
        const Face& face = mesh.faces[f];
        const double gamma_f = sipg_face_coefficient(mesh, mat, penalty_gamma, f);
        const std::array<double, 2> nrm = {face.nx, face.ny};

        if (!face.is_boundary()) {
            const std::array<int, 2> cells = {face.cell_minus, face.cell_plus};
            const std::array<double, 2> side_sign = {1.0, -1.0};  // jump = minus - plus
            const detail::FaceTrace tr0 = detail::face_trace(mesh, f, cells[0]);
            const detail::FaceTrace tr1 = detail::face_trace(mesh, f, cells[1]);
            const std::array<detail::FaceTrace, 2> trs = {tr0, tr1};

            // Per quadrature point: traces and tractions of all 16 dofs.
            for (std::size_t qk = 0; qk < g2.points.size(); ++qk) {
                const double s = g2.points[qk];
                const double w = g2.weights[qk] * face.measure;
                std::array<std::array<std::array<double, 2>, 8>, 2> val{};
                std::array<std::array<std::array<double, 2>, 8>, 2> trac{};
                for (int side = 0; side < 2; ++side) {
                    const Cell& cell = mesh.cells[cells[side]];
                    const auto rp = detail::face_ref_point(trs[side], s);
                    for (int l = 0; l < 8; ++l) {
                        const int a = l / 2, comp = l % 2;
                        const double nv = shapes::n(a, rp[0], rp[1]);
                        val[side][l] = {comp == 0 ? nv : 0.0, comp == 1 ? nv : 0.0};
                        trac[side][l] =
                            shapes::traction(cell, mat, a, comp, rp[0], rp[1], nrm[0], nrm[1]);
                    }
                }
                for (int s1 = 0; s1 < 2; ++s1)
                    for (int l1 = 0; l1 < 8; ++l1) {
                        const int gi = dofs.cell_u[cells[s1]][l1];
                        for (int s2 = 0; s2 < 2; ++s2)
                            for (int l2 = 0; l2 < 8; ++l2) {
                                const int gj = dofs.cell_u[cells[s2]][l2];
                                // trial (s2,l2), test (s1,l1)
                                const double cons =
                                    -0.5 * (trac[s2][l2][0] * val[s1][l1][0] + trac[s2][l2][1] * val[s1][l1][1]) *
                                    side_sign[s1];
                                const double symm =
                                    -0.5 * (trac[s1][l1][0] * val[s2][l2][0] + trac[s1][l1][1] * val[s2][l2][1]) *
                                    side_sign[s2];
                                const double pen =
                                    gamma_f * side_sign[s1] * side_sign[s2] *
                                    (val[s1][l1][0] * val[s2][l2][0] + val[s1][l1][1] * val[s2][l2][1]);
                                ta.push_back({gi, gj, w * (cons + symm + pen)});
                            }
                        // E face term: -int {p} n.[[v]] with {1_K} = 1/2.
                        const double nv = nrm[0] * val[s1][l1][0] + nrm[1] * val[s1][l1][1];
                        for (int pc = 0; pc < 2; ++pc)
                            te.push_back({gi, dofs.cell_p[cells[pc]], -0.5 * w * side_sign[s1] * nv});
                    }
            }
        } else {
            const int c = face.cell_minus;
            const Cell& cell = mesh.cells[c];
            const DisplacementBC& dbc = bc.displacement_on(face.tag);
            if (!dbc.dirichlet[0] && !dbc.dirichlet[1]) continue;  // pure traction face
            const detail::FaceTrace tr = detail::face_trace(mesh, f, c);
            const int nc = face.orientation == FaceOrientation::vertical ? 0 : 1;  // normal component

            for (std::size_t qk = 0; qk < g2.points.size(); ++qk) {
                const double s = g2.points[qk];
                const double w = g2.weights[qk] * face.measure;
                const auto rp = detail::face_ref_point(tr, s);
                std::array<std::array<double, 2>, 8> val{};
                std::array<std::array<double, 2>, 8> trac{};
                for (int l = 0; l < 8; ++l) {
                    const int a = l / 2, comp = l % 2;
                    const double nv = shapes::n(a, rp[0], rp[1]);
                    val[l] = {comp == 0 ? nv : 0.0, comp == 1 ? nv : 0.0};
                    trac[l] = shapes::traction(cell, mat, a, comp, rp[0], rp[1], nrm[0], nrm[1]);
                }
                auto mask = [&](const std::array<double, 2>& v) {
                    return std::array<double, 2>{dbc.dirichlet[0] ? v[0] : 0.0, dbc.dirichlet[1] ? v[1] : 0.0};
                };
                for (int l1 = 0; l1 < 8; ++l1) {
                    const int gi = dofs.cell_u[c][l1];
                    const auto mv1 = mask(val[l1]);
                    for (int l2 = 0; l2 < 8; ++l2) {
                        const int gj = dofs.cell_u[c][l2];
                        const auto mv2 = mask(val[l2]);
                        const double cons = -(trac[l2][0] * mv1[0] + trac[l2][1] * mv1[1]);
                        const double symm = -(trac[l1][0] * mv2[0] + trac[l1][1] * mv2[1]);
                        const double pen = gamma_f * (mv1[0] * mv2[0] + mv1[1] * mv2[1]);
                        ta.push_back({gi, gj, w * (cons + symm + pen)});
                    }
                    if (dbc.dirichlet[nc]) {
                        const double nv = nrm[0] * val[l1][0] + nrm[1] * val[l1][1];
                        te.push_back({gi, dofs.cell_p[c], -w * nv});
                    }
                }
            }
        }
    }

    ops.A = csr_from_triplets(dofs.n_u, dofs.n_u, std::move(ta));
    ops.M_q = csr_from_triplets(dofs.n_q, dofs.n_q, std::move(tmq));
    ops.B = csr_from_triplets(dofs.n_q, dofs.n_p, std::move(tb));
    ops.E = csr_from_triplets(dofs.n_u, dofs.n_p, std::move(te));
    ops.M_p = csr_from_triplets(dofs.n_p, dofs.n_p, std::move(tmp));
    ops.m_p_diag.resize(dofs.n_p);
    for (int c = 0; c < dofs.n_p; ++c) ops.m_p_diag[c] = mesh.cells[c].area();

    // Reference-state projections and the time-independent momentum shift
    // b_u += A u0 - b E p0 - E sigma_v0 (the sigma_0, u_0, p_0 offsets of
    // the momentum equation as right-hand-side data).
    ops.u0_coeffs = project_u(mesh, dofs, mat.u0);
    ops.p0_coeffs = project_p(mesh, dofs, mat.p0);
    ops.sigma_v0_cells = project_p(mesh, dofs, mat.sigma0_v);
    ops.rhs_ref_u = ops.A.apply(ops.u0_coeffs) - mat.biot_b * ops.E.apply(ops.p0_coeffs) -
                    ops.E.apply(ops.sigma_v0_cells);
    return ops;
}

/// Stationary operator K applied to a field triple:
/// rows (A u - b E p, M_q q + B p, B^T q).
inline FieldVecs apply_stationary(const SpatialOperators& ops, const FieldVecs& x) {
    FieldVecs y;
    y.u = ops.A.apply(x.u) - ops.mat.biot_b * ops.E.apply(x.p);
    y.q = ops.M_q.apply(x.q) + ops.B.apply(x.p);
    y.p = ops.B.apply_transpose(x.q);
    return y;
}

/// Time-derivative operator D applied to (u, p): only the (negated) mass
/// row is nonzero, (-b E^T u - (1/M) M_p p).
inline Eigen::VectorXd apply_time_derivative_p(const SpatialOperators& ops, const Eigen::VectorXd& u,
                                               const Eigen::VectorXd& p) {
    return -ops.mat.biot_b * ops.E.apply_transpose(u) -
           (1.0 / ops.mat.biot_m) * ops.m_p_diag.cwiseProduct(p).eval();
}

inline Eigen::VectorXd project_p(const Mesh& mesh, const DofMaps& dofs, const ScalarField& f) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dofs.n_p);
    if (!f) return v;
    const QuadratureRule gq = gauss_legendre(kDataQuadOrder);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        double s = 0.0;
        for (std::size_t i = 0; i < gq.points.size(); ++i)
            for (std::size_t j = 0; j < gq.points.size(); ++j)
                s += gq.weights[i] * gq.weights[j] *
                     f(cell.x0 + gq.points[i] * cell.hx, cell.y0 + gq.points[j] * cell.hy);
        v[dofs.cell_p[c]] = s;  // cell average
    }
    return v;
}

inline Eigen::VectorXd project_u(const Mesh& mesh, const DofMaps& dofs, const VectorField& f) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dofs.n_u);
    if (!f) return v;
    const QuadratureRule gq = gauss_legendre(kDataQuadOrder);
    Eigen::Matrix4d mass;
    mass << 4, 2, 2, 1, 2, 4, 1, 2, 2, 1, 4, 2, 1, 2, 2, 4;
    mass /= 36.0;
    const Eigen::Matrix4d mass_inv = mass.inverse();
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        Eigen::Vector4d bx = Eigen::Vector4d::Zero(), by = Eigen::Vector4d::Zero();
        for (std::size_t i = 0; i < gq.points.size(); ++i)
            for (std::size_t j = 0; j < gq.points.size(); ++j) {
                const double xi = gq.points[i], eta = gq.points[j];
                const double w = gq.weights[i] * gq.weights[j];
                const auto uv = f(cell.x0 + xi * cell.hx, cell.y0 + eta * cell.hy);
                for (int a = 0; a < 4; ++a) {
                    const double nv = shapes::n(a, xi, eta);
                    bx[a] += w * nv * uv[0];
                    by[a] += w * nv * uv[1];
                }
            }
        const Eigen::Vector4d cx = mass_inv * bx, cy = mass_inv * by;
        for (int a = 0; a < 4; ++a) {
            v[dofs.u_dof(c, a, 0)] = cx[a];
            v[dofs.u_dof(c, a, 1)] = cy[a];
        }
    }
    return v;
}

/// Component load vectors at time t: gravity/source terms, Neumann
/// traction, Nitsche data for prescribed displacement, prescribed boundary
/// pressure in the Darcy row, eliminated-flux corrections, and the
/// reference-state shift in b_u. The mass component is assembled in the
/// negated-row convention used by the operators.
inline FieldVecs assemble_rhs(const Mesh& mesh, const DofMaps& dofs, const MaterialParameters& mat,
                              const SpatialOperators& ops, const VolumeData& data, double t) {
    FieldVecs r;
    r.u = Eigen::VectorXd::Zero(dofs.n_u);
    r.q = Eigen::VectorXd::Zero(dofs.n_q);
    r.p = Eigen::VectorXd::Zero(dofs.n_p);

    const QuadratureRule gq = gauss_legendre(kDataQuadOrder);

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        const double area = cell.area();
        const auto cf = mesh.cell_faces(c);
        std::array<double, 4> sgn{};
        for (int k = 0; k < 4; ++k) {
            const Face& f = mesh.faces[cf[k]];
            sgn[k] = f.orientation == FaceOrientation::vertical ? f.nx : f.ny;
        }
        for (std::size_t i = 0; i < gq.points.size(); ++i)
            for (std::size_t j = 0; j < gq.points.size(); ++j) {
                const double xi = gq.points[i], eta = gq.points[j];
                const double w = gq.weights[i] * gq.weights[j] * area;
                const double x = cell.x0 + xi * cell.hx, y = cell.y0 + eta * cell.hy;
                if (data.momentum) {
                    const auto fm = data.momentum(x, y, t);
                    for (int a = 0; a < 4; ++a) {
                        const double nv = shapes::n(a, xi, eta);
                        r.u[dofs.u_dof(c, a, 0)] += w * nv * fm[0];
                        r.u[dofs.u_dof(c, a, 1)] += w * nv * fm[1];
                    }
                }
                if (data.darcy) {
                    const auto fd = data.darcy(x, y, t);
                    // RT0 basis values: hat profiles along the face normal.
                    const std::array<double, 2> wx = {sgn[0] * (1.0 - xi), sgn[1] * xi};
                    const std::array<double, 2> wy = {sgn[2] * (1.0 - eta), sgn[3] * eta};
                    if (!ops.q_constrained[cf[0]]) r.q[cf[0]] += w * wx[0] * fd[0];
                    if (!ops.q_constrained[cf[1]]) r.q[cf[1]] += w * wx[1] * fd[0];
                    if (!ops.q_constrained[cf[2]]) r.q[cf[2]] += w * wy[0] * fd[1];
                    if (!ops.q_constrained[cf[3]]) r.q[cf[3]] += w * wy[1] * fd[1];
                }
                if (data.mass) r.p[dofs.cell_p[c]] -= w * data.mass(x, y, t);  // negated mass row
            }
    }

    // Boundary faces: traction data, Nitsche displacement data, prescribed
    // pressure, essential flux values.
    Eigen::VectorXd q_values = Eigen::VectorXd::Zero(dofs.n_q);
    for (int f = 0; f < mesh.n_faces(); ++f) {
        const Face& face = mesh.faces[f];
        if (!face.is_boundary()) continue;
        const int c = face.cell_minus;
        const Cell& cell = mesh.cells[c];
        const detail::FaceTrace tr = detail::face_trace(mesh, f, c);
        const DisplacementBC& dbc = ops.bc.displacement_on(face.tag);
        const FlowBC& fbc = ops.bc.flow_on(face.tag);
        const double gamma_f = sipg_face_coefficient(mesh, mat, ops.penalty, f);

        for (std::size_t qk = 0; qk < gq.points.size(); ++qk) {
            const double s = gq.points[qk];
            const double w = gq.weights[qk] * face.measure;
            const auto rp = detail::face_ref_point(tr, s);
            const double x = face.x0 + s * (face.x1 - face.x0);
            const double y = face.y0 + s * (face.y1 - face.y0);

            const auto tn = eval_or_zero(dbc.traction_data, x, y, t);
            const auto ud = eval_or_zero(dbc.dirichlet_data, x, y, t);
            const std::array<double, 2> mud = {dbc.dirichlet[0] ? ud[0] : 0.0,
                                               dbc.dirichlet[1] ? ud[1] : 0.0};
            for (int l = 0; l < 8; ++l) {
                const int a = l / 2, comp = l % 2;
                const double nv = shapes::n(a, rp[0], rp[1]);
                const int gi = dofs.u_dof(c, a, comp);
                if (!dbc.dirichlet[comp]) r.u[gi] += w * nv * tn[comp];
                // Nitsche data: gamma <u_D, v> - <sigma(v) n, u_D>, masked.
                if (dbc.dirichlet[comp]) r.u[gi] += w * gamma_f * nv * mud[comp];
                const auto tv = shapes::traction(cell, mat, a, comp, rp[0], rp[1], face.nx, face.ny);
                r.u[gi] -= w * (tv[0] * mud[0] + tv[1] * mud[1]);
            }
            if (fbc.kind == FlowBC::Kind::pressure) {
                // -<p_D, w_F . n_out>; the normal trace of the face basis is
                // 1 along its own face.
                r.q[f] -= w * eval_or_zero(fbc.data, x, y, t);
            } else {
                q_values[f] += w / face.measure * eval_or_zero(fbc.data, x, y, t);
            }
        }
        if (fbc.kind == FlowBC::Kind::normal_flux) r.q[f] = q_values[f];
    }

    // Eliminated couplings of constrained flux dofs.
    for (const Triplet& tr : ops.mq_bc) r.q[tr.row] -= tr.value * q_values[tr.col];
    for (const Triplet& tr : ops.b_bc) r.p[tr.col] -= tr.value * q_values[tr.row];

    r.u += ops.rhs_ref_u;
    return r;
}

/// Per-cell volumetric mean stress
/// sigma_v = sigma_v0 + K_dr * mean(div(u - u0)) - b (p - p0).
inline Eigen::VectorXd volumetric_mean_stress(const Mesh& mesh, const DofMaps& dofs,
                                              const SpatialOperators& ops, const Eigen::VectorXd& u,
                                              const Eigen::VectorXd& p) {
    if (u.size() != dofs.n_u || p.size() != dofs.n_p)
        throw std::invalid_argument("volumetric_mean_stress: size mismatch");
    const QuadratureRule g2 = gauss_legendre(2);
    Eigen::VectorXd sv(dofs.n_p);
    const Eigen::VectorXd du = u - ops.u0_coeffs;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        double div_mean = 0.0;
        for (std::size_t i = 0; i < g2.points.size(); ++i)
            for (std::size_t j = 0; j < g2.points.size(); ++j) {
                const double xi = g2.points[i], eta = g2.points[j];
                const double w = g2.weights[i] * g2.weights[j];
                for (int a = 0; a < 4; ++a) {
                    const auto g = shapes::grad(cell, a, xi, eta);
                    div_mean += w * (g[0] * du[dofs.u_dof(c, a, 0)] + g[1] * du[dofs.u_dof(c, a, 1)]);
                }
            }
        sv[c] = ops.sigma_v0_cells[c] + ops.mat.k_dr * div_mean -
                ops.mat.biot_b * (p[c] - ops.p0_coeffs[c]);
    }
    return sv;
}

} // namespace porodg

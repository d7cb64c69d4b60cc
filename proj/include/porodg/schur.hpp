#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "porodg/errors.hpp"
#include "porodg/time_basis.hpp"

namespace porodg {

/// Real Schur factorization W = Q T Q^T of the time operator W = M_hat^{-1} G_hat,
/// with the diagonal blocks ordered by ascending real part of their
/// eigenvalues (ties broken by ascending |Im|) and 2x2 blocks standardized
/// to equal diagonal entries. Each 1x1 block is a positive real eigenvalue
/// (a dG(0)-type solve); each 2x2 block carries a complex-conjugate pair
/// with positive real part (a dG(1)-type solve).
struct SchurForm {
    Eigen::MatrixXd W;
    Eigen::MatrixXd Q;  // real orthogonal
    Eigen::MatrixXd T;  // quasi-upper-triangular
    std::vector<int> block_sizes;   // partition of 0..r into 1s and 2s
    std::vector<int> block_starts;

    int n_blocks() const { return static_cast<int>(block_sizes.size()); }
    Eigen::VectorXd lambda_diag() const { return T.diagonal(); }

    std::complex<double> block_eigenvalue(int g) const {
        const int i = block_starts[g];
        if (block_sizes[g] == 1) return {T(i, i), 0.0};
        const double a = T(i, i), b = T(i, i + 1), c = T(i + 1, i), d = T(i + 1, i + 1);
        const double re = 0.5 * (a + d);
        const double disc = 0.25 * (a - d) * (a - d) + b * c;  // < 0 for a conjugate pair
        return {re, std::sqrt(std::max(0.0, -disc))};
    }
};

namespace detail {

/// Swap two adjacent diagonal blocks of a real Schur form by an orthogonal
/// similarity (direct-swap method): solve the small Sylvester equation
/// A11 X - X A22 = -A12, orthonormalize [X; I], and rotate.
inline void swap_adjacent_blocks(Eigen::MatrixXd& t, Eigen::MatrixXd& q, int i, int p, int pq) {
    using Eigen::MatrixXd;
    const int qs = pq - p;  // size of the trailing block
    const MatrixXd a11 = t.block(i, i, p, p);
    const MatrixXd a12 = t.block(i, i + p, p, qs);
    const MatrixXd a22 = t.block(i + p, i + p, qs, qs);

    MatrixXd sys = MatrixXd::Zero(p * qs, p * qs);
    Eigen::VectorXd rhs(p * qs);
    for (int cc = 0; cc < qs; ++cc)
        for (int rr = 0; rr < p; ++rr) {
            const int eq = cc * p + rr;
            for (int k = 0; k < p; ++k) sys(eq, cc * p + k) += a11(rr, k);
            for (int k = 0; k < qs; ++k) sys(eq, k * p + rr) -= a22(k, cc);
            rhs[eq] = -a12(rr, cc);
        }
    const Eigen::VectorXd xv = sys.partialPivLu().solve(rhs);
    MatrixXd x(p, qs);
    for (int cc = 0; cc < qs; ++cc)
        for (int rr = 0; rr < p; ++rr) x(rr, cc) = xv[cc * p + rr];

    MatrixXd stack(p + qs, qs);
    stack.topRows(p) = x;
    stack.bottomRows(qs) = MatrixXd::Identity(qs, qs);
    const MatrixXd qr = Eigen::HouseholderQR<MatrixXd>(stack).householderQ();

    t.middleCols(i, pq) = t.middleCols(i, pq) * qr;
    t.middleRows(i, pq) = qr.transpose() * t.middleRows(i, pq);
    q.middleCols(i, pq) = q.middleCols(i, pq) * qr;

    // Hard-zero the new strictly-lower part of the swapped window.
    for (int rr = qs; rr < pq; ++rr)
        for (int cc = 0; cc < qs; ++cc) t(i + rr, i + cc) = 0.0;
    if (qs == 2 && std::abs(t(i + 1, i)) < 1e-13) t(i + 1, i) = 0.0;
    if (p == 2) {
        const int j = i + qs;
        if (std::abs(t(j + 1, j)) < 1e-13) t(j + 1, j) = 0.0;
    }
}

/// Rotate a 2x2 block with complex eigenvalues to equal diagonal entries.
inline void standardize_block(Eigen::MatrixXd& t, Eigen::MatrixXd& q, int i) {
    const double a = t(i, i), b = t(i, i + 1), c = t(i + 1, i), d = t(i + 1, i + 1);
    if (a == d) return;
    const double theta = 0.5 * std::atan2(a - d, b + c);
    const double cs = std::cos(theta), sn = std::sin(theta);
    Eigen::Matrix2d g;
    g << cs, sn, -sn, cs;
    t.middleCols(i, 2) = t.middleCols(i, 2) * g;
    t.middleRows(i, 2) = g.transpose() * t.middleRows(i, 2);
    q.middleCols(i, 2) = q.middleCols(i, 2) * g;
}

} // namespace detail

inline SchurForm real_schur(const TimeBasis& basis) {
    using Eigen::MatrixXd;
    const int n = basis.n_nodes();

    SchurForm s;
    s.W = basis.weights.cwiseInverse().asDiagonal() * basis.G_hat;

    Eigen::RealSchur<MatrixXd> dec;
    dec.setMaxIterations(60 * n);
    dec.compute(s.W, /*computeU=*/true);
    if (dec.info() != Eigen::Success)
        throw SolverError("real_schur: QR iteration did not converge within the sweep budget");
    s.T = dec.matrixT();
    s.Q = dec.matrixU();

    auto detect_blocks = [&]() {
        s.block_sizes.clear();
        s.block_starts.clear();
        int i = 0;
        while (i < n) {
            const bool two = (i + 1 < n) &&
                             std::abs(s.T(i + 1, i)) > 1e-12 * (std::abs(s.T(i, i)) + std::abs(s.T(i + 1, i + 1)));
            s.block_starts.push_back(i);
            s.block_sizes.push_back(two ? 2 : 1);
            i += two ? 2 : 1;
        }
    };
    detect_blocks();

    // Order blocks ascending by (Re, |Im|) with adjacent swaps.
    auto key_less = [&](int g1, int g2) {
        const auto e1 = s.block_eigenvalue(g1), e2 = s.block_eigenvalue(g2);
        if (std::abs(e1.real() - e2.real()) > 1e-12 * (1.0 + std::abs(e1.real()))) return e1.real() < e2.real();
        return std::abs(e1.imag()) < std::abs(e2.imag());
    };
    bool swapped = true;
    while (swapped) {
        swapped = false;
        for (int g = 0; g + 1 < s.n_blocks(); ++g) {
            if (key_less(g + 1, g)) {
                const int i = s.block_starts[g];
                const int p = s.block_sizes[g];
                const int pq = p + s.block_sizes[g + 1];
                detail::swap_adjacent_blocks(s.T, s.Q, i, p, pq);
                detect_blocks();
                swapped = true;
                break;
            }
        }
    }

    for (int g = 0; g < s.n_blocks(); ++g)
        if (s.block_sizes[g] == 2) detail::standardize_block(s.T, s.Q, s.block_starts[g]);

    // Clean everything strictly below the block diagonal to exact zero.
    for (int g = 0; g < s.n_blocks(); ++g) {
        const int i = s.block_starts[g], bs = s.block_sizes[g];
        for (int rr = i; rr < i + bs; ++rr)
            for (int cc = 0; cc < i; ++cc) s.T(rr, cc) = 0.0;
        if (bs == 1 && i + 1 < n) s.T(i + 1, i) = 0.0;
    }

    // Factorization sanity; these hold to roundoff by construction.
    if ((s.Q.transpose() * s.Q - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
        throw SolverError("real_schur: Q lost orthogonality");
    if ((s.Q * s.T * s.Q.transpose() - s.W).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + s.W.cwiseAbs().maxCoeff()))
        throw SolverError("real_schur: factorization residual too large");
    for (int g = 0; g < s.n_blocks(); ++g)
        if (s.block_eigenvalue(g).real() <= 0.0)
            throw SolverError("real_schur: nonpositive real part in a diagonal block");

    return s;
}

} // namespace porodg

#include <gtest/gtest.h>

#include <random>

#include "porodg/dense.hpp"
#include "porodg/gmres.hpp"
#include "porodg/sparse.hpp"

using namespace porodg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

SparseMatrix random_csr(int n, int m, int per_row, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> col(0, m - 1);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < per_row; ++k) t.push_back({i, col(rng), val(rng)});
    return csr_from_triplets(n, m, t);
}

// Conjugate-residual iteration, used only as an independent oracle.
VectorXd conjugate_residual(const MatrixXd& a, const VectorXd& b, int iters) {
    VectorXd x = VectorXd::Zero(b.size());
    VectorXd r = b, p = r, ar = a * r, ap = ar;
    for (int k = 0; k < iters; ++k) {
        const double alpha = r.dot(ar) / ap.squaredNorm();
        x += alpha * p;
        const VectorXd rn = r - alpha * ap;
        const VectorXd arn = a * rn;
        const double beta = rn.dot(arn) / r.dot(ar);
        r = rn;
        ar = arn;
        p = r + beta * p;
        ap = ar + beta * ap;
        if (r.norm() < 1e-14 * b.norm()) break;
    }
    return x;
}

} // namespace

TEST(Sparse, IdentityAndZero) {
    std::vector<Triplet> t;
    for (int i = 0; i < 5; ++i) t.push_back({i, i, 1.0});
    const SparseMatrix eye = csr_from_triplets(5, 5, t);
    VectorXd x(5);
    x << 1, -2, 3, -4, 5;
    EXPECT_NEAR((eye.apply(x) - x).norm(), 0.0, 0.0);

    const SparseMatrix zero = csr_from_triplets(5, 5, {});
    EXPECT_NEAR(zero.apply(x).norm(), 0.0, 0.0);
}

TEST(Sparse, RandomAgainstDense) {
    std::mt19937_64 rng(1234);
    const SparseMatrix a = random_csr(50, 50, 6, rng);
    ASSERT_TRUE(a.well_formed());
    const MatrixXd ad = a.to_dense();
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        VectorXd x(50);
        for (int i = 0; i < 50; ++i) x[i] = val(rng);
        const VectorXd y1 = a.apply(x);
        const VectorXd y2 = ad * x;
        EXPECT_LE((y1 - y2).norm(), 1e-14 * y2.norm() + 1e-15);
        const VectorXd z1 = a.apply_transpose(x);
        const VectorXd z2 = ad.transpose() * x;
        EXPECT_LE((z1 - z2).norm(), 1e-14 * z2.norm() + 1e-15);
    }
}

TEST(Sparse, DuplicateTripletsMerge) {
    const SparseMatrix a = csr_from_triplets(2, 2, {{0, 1, 1.5}, {0, 1, 2.5}, {1, 0, -1.0}});
    EXPECT_EQ(a.nnz(), 2);
    EXPECT_DOUBLE_EQ(a.coeff(0, 1), 4.0);
    EXPECT_DOUBLE_EQ(a.coeff(1, 0), -1.0);
    EXPECT_TRUE(a.well_formed());
    EXPECT_THROW(csr_from_triplets(2, 2, {{2, 0, 1.0}}), std::invalid_argument);
}

TEST(Dense, IdentityAndDiagonal) {
    const MatrixXd eye = MatrixXd::Identity(4, 4);
    VectorXd b(4);
    b << 3, 1, -4, 1;
    EXPECT_NEAR((dense_solve(eye, b) - b).norm(), 0.0, 1e-15);

    MatrixXd d = MatrixXd::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    VectorXd rhs(2);
    rhs << 2, 8;
    const VectorXd x = dense_solve(d, rhs);
    EXPECT_NEAR(x[0], 1.0, 1e-15);
    EXPECT_NEAR(x[1], 2.0, 1e-15);
}

TEST(Dense, RandomSpdAgainstConjugateResidual) {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> nd;
    MatrixXd m(30, 30);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 30; ++j) m(i, j) = nd(rng);
    const MatrixXd a = m * m.transpose() + 30.0 * MatrixXd::Identity(30, 30);
    VectorXd b(30);
    for (int i = 0; i < 30; ++i) b[i] = nd(rng);

    const VectorXd x = dense_solve(a, b);
    const VectorXd x_cr = conjugate_residual(a, b, 500);
    EXPECT_LE((x - x_cr).norm(), 1e-10 * x_cr.norm());
    EXPECT_LE((a * x - b).norm(), 1e-10 * b.norm());
}

TEST(Dense, SingularMatrixThrows) {
    MatrixXd a = MatrixXd::Zero(3, 3);
    a(0, 0) = 1.0;
    a(1, 1) = 1.0;  // third row/col zero
    VectorXd b = VectorXd::Ones(3);
    EXPECT_THROW(dense_solve(a, b), SolverError);
}

TEST(Gmres, IdentityConvergesInOneIteration) {
    auto op = [](const VectorXd& v) { return v; };
    VectorXd b(6);
    b << 1, 2, 3, 4, 5, 6;
    auto [x, rep] = gmres(op, identity_op(), b, GmresOptions{1e-12, 30, 100});
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 1);
    EXPECT_LE((x - b).norm(), 1e-12 * b.norm());
}

TEST(Gmres, ThreeDistinctEigenvaluesNeedAtMostThree) {
    const int n = 30;
    VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = (i % 3 == 0) ? 1.0 : (i % 3 == 1 ? 2.5 : 7.0);
    auto op = [&](const VectorXd& v) -> VectorXd { return d.cwiseProduct(v); };
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = nd(rng);
    auto [x, rep] = gmres(op, identity_op(), b, GmresOptions{1e-12, 50, 100});
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.iterations, 3);
}

TEST(Gmres, ExactInversePreconditionerOneIteration) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    MatrixXd a(20, 20);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) a(i, j) = nd(rng) + (i == j ? 10.0 : 0.0);
    const DenseLu lu(a);
    auto op = [&](const VectorXd& v) -> VectorXd { return a * v; };
    auto pre = [&](const VectorXd& v) -> VectorXd { return lu.solve(v); };
    VectorXd b(20);
    for (int i = 0; i < 20; ++i) b[i] = nd(rng);
    auto [x, rep] = gmres(op, pre, b, GmresOptions{1e-12, 30, 100});
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 1);
    EXPECT_LE((a * x - b).norm(), 1e-11 * b.norm());
}

TEST(Gmres, TrueResidualHistoryMonotone) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd;
    MatrixXd a(40, 40);
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 40; ++j) a(i, j) = nd(rng) + (i == j ? 8.0 : 0.0);
    VectorXd b(40);
    for (int i = 0; i < 40; ++i) b[i] = nd(rng);
    auto op = [&](const VectorXd& v) -> VectorXd { return a * v; };
    auto [x, rep] = gmres(op, identity_op(), b, GmresOptions{1e-10, 100, 100});
    EXPECT_TRUE(rep.converged);
    ASSERT_GE(rep.residual_history.size(), 2u);
    for (std::size_t k = 1; k < rep.residual_history.size(); ++k)
        EXPECT_LE(rep.residual_history[k], rep.residual_history[k - 1] * (1.0 + 1e-12));
    EXPECT_LE(rep.final_relative_residual, 1e-10);
}

TEST(Gmres, ZeroRhsAbsoluteTieBreak) {
    auto op = [](const VectorXd& v) { return v; };
    auto [x, rep] = gmres(op, identity_op(), VectorXd::Zero(5), GmresOptions{1e-10, 10, 10});
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 0);
    EXPECT_NEAR(x.norm(), 0.0, 0.0);
}

TEST(Gmres, FlexibleVariantMatchesPlainForFixedPreconditioner) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd;
    MatrixXd a(25, 25);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 25; ++j) a(i, j) = nd(rng) + (i == j ? 12.0 : 0.0);
    VectorXd b(25);
    for (int i = 0; i < 25; ++i) b[i] = nd(rng);
    MatrixXd dpre = a.diagonal().asDiagonal().inverse();
    auto op = [&](const VectorXd& v) -> VectorXd { return a * v; };
    auto pre = [&](const VectorXd& v) -> VectorXd { return dpre * v; };
    auto [x1, r1] = gmres(op, pre, b, GmresOptions{1e-11, 50, 100});
    auto [x2, r2] = gmres_flexible(op, pre, b, GmresOptions{1e-11, 50, 100});
    EXPECT_TRUE(r1.converged);
    EXPECT_TRUE(r2.converged);
    EXPECT_LE((x1 - x2).norm(), 1e-9 * x1.norm());
}

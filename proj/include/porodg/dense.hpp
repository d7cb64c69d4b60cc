#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "porodg/errors.hpp"

namespace porodg {

/// Cached partial-pivoting LU factorization with an explicit
/// singular-to-working-precision check at factor time.
class DenseLu {
public:
    DenseLu() = default;

    explicit DenseLu(const Eigen::MatrixXd& a) { factor(a); }

    void factor(const Eigen::MatrixXd& a) {
        if (a.rows() != a.cols()) throw std::invalid_argument("DenseLu: matrix must be square");
        n_ = static_cast<int>(a.rows());
        lu_.compute(a);
        const Eigen::VectorXd d = lu_.matrixLU().diagonal().cwiseAbs();
        const double dmax = n_ > 0 ? d.maxCoeff() : 0.0;
        const double dmin = n_ > 0 ? d.minCoeff() : 0.0;
        if (n_ > 0 && (dmax == 0.0 || dmin <= 1e-14 * dmax))
            throw SolverError("dense LU: matrix is singular to working precision");
        ready_ = true;
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        if (!ready_) throw SolverError("DenseLu: not factored");
        if (b.size() != n_) throw std::invalid_argument("DenseLu::solve: dimension mismatch");
        return lu_.solve(b);
    }

    bool ready() const { return ready_; }
    int size() const { return n_; }

private:
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    int n_ = 0;
    bool ready_ = false;
};

/// Direct solve of a square dense system by partial-pivoting LU.
inline Eigen::VectorXd dense_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    if (a.rows() != b.size()) throw std::invalid_argument("dense_solve: dimension mismatch");
    return DenseLu(a).solve(b);
}

} // namespace porodg

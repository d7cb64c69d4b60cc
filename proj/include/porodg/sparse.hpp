#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace porodg {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Compressed-row sparse matrix. Column indices are strictly increasing
/// within each row; duplicate entries are merged at build time.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_offsets;  // size rows + 1
    std::vector<int> col_indices;
    std::vector<double> values;

    int nnz() const { return static_cast<int>(values.size()); }

    /// y = A x
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        if (x.size() != cols) throw std::invalid_argument("spmv: dimension mismatch");
        Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
        for (int i = 0; i < rows; ++i) {
            double s = 0.0;
            for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
                s += values[k] * x[col_indices[k]];
            y[i] = s;
        }
        return y;
    }

    /// y = A^T x, computed from the same stored entries.
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const {
        if (x.size() != rows) throw std::invalid_argument("spmv_transpose: dimension mismatch");
        Eigen::VectorXd y = Eigen::VectorXd::Zero(cols);
        for (int i = 0; i < rows; ++i)
            for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
                y[col_indices[k]] += values[k] * x[i];
        return y;
    }

    Eigen::MatrixXd to_dense() const {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
                d(i, col_indices[k]) = values[k];
        return d;
    }

    double coeff(int i, int j) const {
        for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
            if (col_indices[k] == j) return values[k];
        return 0.0;
    }

    /// Structural sanity: monotone offsets, strictly increasing columns per row.
    bool well_formed() const {
        if (static_cast<int>(row_offsets.size()) != rows + 1) return false;
        if (row_offsets.front() != 0 || row_offsets.back() != nnz()) return false;
        for (int i = 0; i < rows; ++i) {
            if (row_offsets[i] > row_offsets[i + 1]) return false;
            for (int k = row_offsets[i] + 1; k < row_offsets[i + 1]; ++k)
                if (col_indices[k - 1] >= col_indices[k]) return false;
        }
        for (int c : col_indices)
            if (c < 0 || c >= cols) return false;
        return true;
    }
};

/// Merge triplets into CSR. Duplicates are summed in push order (stable),
/// so repeated assembly of the same contributions is bit-reproducible.
inline SparseMatrix csr_from_triplets(int rows, int cols, std::vector<Triplet> trips) {
    for (const Triplet& t : trips)
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw std::invalid_argument("csr_from_triplets: index out of range");

    std::stable_sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_offsets.assign(rows + 1, 0);
    m.col_indices.reserve(trips.size());
    m.values.reserve(trips.size());

    std::size_t k = 0;
    while (k < trips.size()) {
        const int r = trips[k].row, c = trips[k].col;
        double s = 0.0;
        while (k < trips.size() && trips[k].row == r && trips[k].col == c) s += trips[k++].value;
        m.col_indices.push_back(c);
        m.values.push_back(s);
        m.row_offsets[r + 1] += 1;
    }
    std::partial_sum(m.row_offsets.begin(), m.row_offsets.end(), m.row_offsets.begin());
    return m;
}

inline Eigen::VectorXd spmv(const SparseMatrix& a, const Eigen::VectorXd& x) { return a.apply(x); }

} // namespace porodg

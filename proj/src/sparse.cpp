#include "va/sparse.hpp"

#include <algorithm>

namespace va {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    m.row_ptr_.assign(static_cast<size_t>(rows) + 1, 0);
    m.col_idx_.reserve(triplets.size());
    m.values_.reserve(triplets.size());
    for (size_t i = 0; i < triplets.size(); ++i) {
        const Triplet& t = triplets[i];
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw DimensionMismatchError("triplet outside matrix bounds");
        if (!m.col_idx_.empty() && triplets[i - 1].row == t.row && triplets[i - 1].col == t.col) {
            m.values_.back() += t.value;  // merge duplicates
        } else {
            m.col_idx_.push_back(t.col);
            m.values_.push_back(t.value);
            m.row_ptr_[static_cast<size_t>(t.row) + 1]++;
        }
    }
    for (size_t r = 1; r < m.row_ptr_.size(); ++r) m.row_ptr_[r] += m.row_ptr_[r - 1];
    if (static_cast<int64_t>(rows) * cols < kDenseCutoff && rows > 0 && cols > 0) {
        m.dense_.assign(static_cast<size_t>(rows) * cols, 0.0);
        for (int r = 0; r < rows; ++r)
            for (int k = m.row_ptr_[static_cast<size_t>(r)]; k < m.row_ptr_[static_cast<size_t>(r) + 1]; ++k)
                m.dense_[static_cast<size_t>(r) * cols + m.col_idx_[static_cast<size_t>(k)]] =
                    m.values_[static_cast<size_t>(k)];
    }
    return m;
}

SparseMatrix SparseMatrix::identity(int n) {
    std::vector<Triplet> t;
    t.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
}

SparseMatrix SparseMatrix::from_dense(int rows, int cols, const std::vector<double>& dense) {
    std::vector<Triplet> t;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double v = dense[static_cast<size_t>(r) * cols + c];
            if (v != 0.0) t.push_back({r, c, v});
        }
    return from_triplets(rows, cols, std::move(t));
}

std::vector<double> SparseMatrix::apply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != cols_)
        throw DimensionMismatchError("apply: vector length does not match columns");
    std::vector<double> y(static_cast<size_t>(rows_), 0.0);
    if (!dense_.empty()) {
        for (int r = 0; r < rows_; ++r) {
            const double* row = dense_.data() + static_cast<size_t>(r) * cols_;
            double s = 0.0;
            for (int c = 0; c < cols_; ++c) s += row[c] * x[static_cast<size_t>(c)];
            y[static_cast<size_t>(r)] = s;
        }
        return y;
    }
    for (int r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (int k = row_ptr_[static_cast<size_t>(r)]; k < row_ptr_[static_cast<size_t>(r) + 1]; ++k)
            s += values_[static_cast<size_t>(k)] * x[static_cast<size_t>(col_idx_[static_cast<size_t>(k)])];
        y[static_cast<size_t>(r)] = s;
    }
    return y;
}

std::vector<double> SparseMatrix::transpose_apply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != rows_)
        throw DimensionMismatchError("transpose_apply: vector length does not match rows");
    std::vector<double> y(static_cast<size_t>(cols_), 0.0);
    for (int r = 0; r < rows_; ++r) {
        double xr = x[static_cast<size_t>(r)];
        if (xr == 0.0) continue;
        for (int k = row_ptr_[static_cast<size_t>(r)]; k < row_ptr_[static_cast<size_t>(r) + 1]; ++k)
            y[static_cast<size_t>(col_idx_[static_cast<size_t>(k)])] += values_[static_cast<size_t>(k)] * xr;
    }
    return y;
}

SparseMatrix SparseMatrix::transposed() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (int r = 0; r < rows_; ++r)
        for (int k = row_ptr_[static_cast<size_t>(r)]; k < row_ptr_[static_cast<size_t>(r) + 1]; ++k)
            t.push_back({col_idx_[static_cast<size_t>(k)], r, values_[static_cast<size_t>(k)]});
    return from_triplets(cols_, rows_, std::move(t));
}

double SparseMatrix::coeff(int r, int c) const {
    for (int k = row_ptr_[static_cast<size_t>(r)]; k < row_ptr_[static_cast<size_t>(r) + 1]; ++k)
        if (col_idx_[static_cast<size_t>(k)] == c) return values_[static_cast<size_t>(k)];
    return 0.0;
}

std::vector<double> SparseMatrix::to_dense() const {
    std::vector<double> d(static_cast<size_t>(rows_) * cols_, 0.0);
    for (int r = 0; r < rows_; ++r)
        for (int k = row_ptr_[static_cast<size_t>(r)]; k < row_ptr_[static_cast<size_t>(r) + 1]; ++k)
            d[static_cast<size_t>(r) * cols_ + col_idx_[static_cast<size_t>(k)]] = values_[static_cast<size_t>(k)];
    return d;
}

} // namespace va

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "va/errors.hpp"

namespace va {

// Compressed-sparse-row matrix of doubles. Built from coordinate triplets;
// small matrices (rows*cols < kDenseCutoff) additionally keep a dense copy
// that apply() uses directly.
class SparseMatrix {
public:
    static constexpr int kDenseCutoff = 512 * 512;

    SparseMatrix() = default;

    struct Triplet {
        int row;
        int col;
        double value;
    };

    static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);
    static SparseMatrix identity(int n);
    static SparseMatrix from_dense(int rows, int cols, const std::vector<double>& dense);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t nnz() const { return values_.size(); }

    // y = M x
    std::vector<double> apply(std::span<const double> x) const;
    // y = M^T x
    std::vector<double> transpose_apply(std::span<const double> x) const;

    SparseMatrix transposed() const;

    double coeff(int r, int c) const;
    std::vector<double> to_dense() const;

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> values_;
    std::vector<double> dense_;  // populated only under the cutoff
};

} // namespace va

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hed {

using Index = std::size_t;

// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(Index n_rows, Index n_cols);
    DenseMatrix(Index n_rows, Index n_cols, std::vector<double> data);

    static DenseMatrix identity(Index n);

    Index n_rows() const { return rows_; }
    Index n_cols() const { return cols_; }

    double& operator()(Index r, Index c) { return data_[r * cols_ + c]; }
    double operator()(Index r, Index c) const { return data_[r * cols_ + c]; }

    double* row_ptr(Index r) { return data_.data() + r * cols_; }
    const double* row_ptr(Index r) const { return data_.data() + r * cols_; }
    std::span<double> row(Index r) { return {row_ptr(r), cols_}; }
    std::span<const double> row(Index r) const { return {row_ptr(r), cols_}; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    void fill(double v);
    bool all_finite() const;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<double> data_;
};

// dst += c * src (same shape).
void add_scaled(DenseMatrix& dst, const DenseMatrix& src, double c);

// Copy of rows [begin, end).
DenseMatrix block_rows(const DenseMatrix& m, Index begin, Index end);

// Write src into dst starting at row `begin`.
void set_block_rows(DenseMatrix& dst, Index begin, const DenseMatrix& src);

// Add c * src into dst starting at row `begin`.
void add_scaled_block_rows(DenseMatrix& dst, Index begin, const DenseMatrix& src, double c);

// row r of m scaled by s[r], in place.
void scale_rows(DenseMatrix& m, std::span<const double> s);

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// a * b^T for row-major matrices with matching n_cols.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace hed

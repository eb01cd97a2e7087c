#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hed/dense.hpp"

namespace hed {

class Rng;

struct CooEntry {
    Index row;
    Index col;
    double value;
};

// CSR matrix. "Binary" refers to its role (interaction/incidence structure):
// values are stored explicitly so that dropout rescaling and normalization can
// reuse the same type, but construction from interaction data yields 1.0s.
//
// Invariants: row_offsets has n_rows+1 entries, is nondecreasing, starts at 0
// and ends at nnz; column indices are strictly increasing within each row;
// no explicit zeros are stored.
class SparseBinaryMatrix {
public:
    SparseBinaryMatrix() = default;
    SparseBinaryMatrix(Index n_rows, Index n_cols, std::vector<Index> row_offsets,
                       std::vector<Index> col_indices, std::vector<double> values);

    static SparseBinaryMatrix zero(Index n_rows, Index n_cols);
    static SparseBinaryMatrix identity(Index n);

    Index n_rows() const { return rows_; }
    Index n_cols() const { return cols_; }
    Index nnz() const { return col_indices_.size(); }

    const std::vector<Index>& row_offsets() const { return row_offsets_; }
    const std::vector<Index>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }

    std::span<const Index> row_cols(Index r) const {
        return {col_indices_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
    }
    std::span<const double> row_vals(Index r) const {
        return {values_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
    }

    bool has_entry(Index r, Index c) const;
    double value_at(Index r, Index c) const;  // 0.0 when absent

    std::vector<CooEntry> to_coo() const;
    DenseMatrix to_dense() const;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Index> row_offsets_{0};
    std::vector<Index> col_indices_;
    std::vector<double> values_;
};

// Builds CSR from unordered COO entries. Duplicates are summed; entries whose
// sum is exactly zero are dropped. Out-of-range entries raise ConfigError
// naming the offending entry.
SparseBinaryMatrix from_coo(std::span<const CooEntry> entries, Index n_rows, Index n_cols);

SparseBinaryMatrix transpose(const SparseBinaryMatrix& m);

// Sum of values per row / per column.
std::vector<double> row_degrees(const SparseBinaryMatrix& m);
std::vector<double> col_degrees(const SparseBinaryMatrix& m);

// out = m * x. Rows of the output are computed independently (parallelizable)
// with a fixed per-row accumulation order, so the result is bit-identical to
// a sequential evaluation.
void spmm_into(const SparseBinaryMatrix& m, const DenseMatrix& x, DenseMatrix& out);
DenseMatrix spmm(const SparseBinaryMatrix& m, const DenseMatrix& x);

// Drops each stored entry independently with probability p and scales the
// survivors by 1/(1-p). p must be in [0, 1); p == 0 returns the input
// unchanged without consuming randomness.
SparseBinaryMatrix dropout_nonzeros(const SparseBinaryMatrix& m, double p, Rng& rng);

}  // namespace hed

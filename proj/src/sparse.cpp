#include "hed/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "hed/error.hpp"
#include "hed/parallel.hpp"
#include "hed/rng.hpp"

namespace hed {

SparseBinaryMatrix::SparseBinaryMatrix(Index n_rows, Index n_cols,
                                       std::vector<Index> row_offsets,
                                       std::vector<Index> col_indices,
                                       std::vector<double> values)
    : rows_(n_rows),
      cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (row_offsets_.size() != rows_ + 1)
        throw Error("SparseBinaryMatrix: row_offsets must have n_rows+1 entries");
    if (row_offsets_.front() != 0 || row_offsets_.back() != col_indices_.size())
        throw Error("SparseBinaryMatrix: row_offsets must start at 0 and end at nnz");
    if (col_indices_.size() != values_.size())
        throw Error("SparseBinaryMatrix: col_indices and values length mismatch");
    for (Index r = 0; r < rows_; ++r) {
        if (row_offsets_[r] > row_offsets_[r + 1])
            throw Error("SparseBinaryMatrix: row_offsets must be nondecreasing");
        for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            if (col_indices_[k] >= cols_)
                throw Error("SparseBinaryMatrix: column index out of range in row " +
                            std::to_string(r));
            if (k > row_offsets_[r] && col_indices_[k - 1] >= col_indices_[k])
                throw Error("SparseBinaryMatrix: columns must be strictly increasing in row " +
                            std::to_string(r));
        }
    }
}

SparseBinaryMatrix SparseBinaryMatrix::zero(Index n_rows, Index n_cols) {
    return SparseBinaryMatrix(n_rows, n_cols, std::vector<Index>(n_rows + 1, 0), {}, {});
}

SparseBinaryMatrix SparseBinaryMatrix::identity(Index n) {
    std::vector<Index> offs(n + 1), cols(n);
    std::vector<double> vals(n, 1.0);
    for (Index i = 0; i <= n; ++i) offs[i] = i;
    for (Index i = 0; i < n; ++i) cols[i] = i;
    return SparseBinaryMatrix(n, n, std::move(offs), std::move(cols), std::move(vals));
}

bool SparseBinaryMatrix::has_entry(Index r, Index c) const {
    auto cols = row_cols(r);
    return std::binary_search(cols.begin(), cols.end(), c);
}

double SparseBinaryMatrix::value_at(Index r, Index c) const {
    auto cols = row_cols(r);
    auto it = std::lower_bound(cols.begin(), cols.end(), c);
    if (it == cols.end() || *it != c) return 0.0;
    return values_[row_offsets_[r] + static_cast<Index>(it - cols.begin())];
}

std::vector<CooEntry> SparseBinaryMatrix::to_coo() const {
    std::vector<CooEntry> out;
    out.reserve(nnz());
    for (Index r = 0; r < rows_; ++r)
        for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            out.push_back({r, col_indices_[k], values_[k]});
    return out;
}

DenseMatrix SparseBinaryMatrix::to_dense() const {
    DenseMatrix out(rows_, cols_);
    for (Index r = 0; r < rows_; ++r)
        for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            out(r, col_indices_[k]) = values_[k];
    return out;
}

SparseBinaryMatrix from_coo(std::span<const CooEntry> entries, Index n_rows, Index n_cols) {
    for (Index i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.row >= n_rows || e.col >= n_cols)
            throw ConfigError("from_coo: entry " + std::to_string(i) + " (row " +
                              std::to_string(e.row) + ", col " + std::to_string(e.col) +
                              ") out of range for " + std::to_string(n_rows) + "x" +
                              std::to_string(n_cols));
    }
    std::vector<CooEntry> sorted(entries.begin(), entries.end());
    std::sort(sorted.begin(), sorted.end(), [](const CooEntry& a, const CooEntry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    std::vector<Index> offs(n_rows + 1, 0), cols;
    std::vector<double> vals;
    cols.reserve(sorted.size());
    vals.reserve(sorted.size());
    Index i = 0;
    for (Index r = 0; r < n_rows; ++r) {
        while (i < sorted.size() && sorted[i].row == r) {
            Index c = sorted[i].col;
            double sum = 0.0;
            while (i < sorted.size() && sorted[i].row == r && sorted[i].col == c) {
                sum += sorted[i].value;
                ++i;
            }
            if (sum != 0.0) {
                cols.push_back(c);
                vals.push_back(sum);
            }
        }
        offs[r + 1] = cols.size();
    }
    return SparseBinaryMatrix(n_rows, n_cols, std::move(offs), std::move(cols), std::move(vals));
}

SparseBinaryMatrix transpose(const SparseBinaryMatrix& m) {
    std::vector<Index> offs(m.n_cols() + 1, 0);
    const auto& cols = m.col_indices();
    const auto& vals = m.values();
    for (Index c : cols) ++offs[c + 1];
    for (Index c = 0; c < m.n_cols(); ++c) offs[c + 1] += offs[c];

    std::vector<Index> out_cols(m.nnz());
    std::vector<double> out_vals(m.nnz());
    std::vector<Index> cursor(offs.begin(), offs.end() - 1);
    for (Index r = 0; r < m.n_rows(); ++r) {
        for (Index k = m.row_offsets()[r]; k < m.row_offsets()[r + 1]; ++k) {
            Index pos = cursor[cols[k]]++;
            out_cols[pos] = r;
            out_vals[pos] = vals[k];
        }
    }
    return SparseBinaryMatrix(m.n_cols(), m.n_rows(), std::move(offs), std::move(out_cols),
                              std::move(out_vals));
}

std::vector<double> row_degrees(const SparseBinaryMatrix& m) {
    std::vector<double> d(m.n_rows(), 0.0);
    for (Index r = 0; r < m.n_rows(); ++r) {
        double s = 0.0;
        for (double v : m.row_vals(r)) s += v;
        d[r] = s;
    }
    return d;
}

std::vector<double> col_degrees(const SparseBinaryMatrix& m) {
    std::vector<double> d(m.n_cols(), 0.0);
    const auto& cols = m.col_indices();
    const auto& vals = m.values();
    for (Index k = 0; k < m.nnz(); ++k) d[cols[k]] += vals[k];
    return d;
}

void spmm_into(const SparseBinaryMatrix& m, const DenseMatrix& x, DenseMatrix& out) {
    if (m.n_cols() != x.n_rows()) throw Error("spmm: inner dimension mismatch");
    if (out.n_rows() != m.n_rows() || out.n_cols() != x.n_cols())
        throw Error("spmm: output shape mismatch");
    const Index d = x.n_cols();
    parallel_for(m.n_rows(), [&](Index lo, Index hi) {
        for (Index r = lo; r < hi; ++r) {
            double* o = out.row_ptr(r);
            std::memset(o, 0, d * sizeof(double));
            auto cols = m.row_cols(r);
            auto vals = m.row_vals(r);
            for (Index k = 0; k < cols.size(); ++k) {
                const double v = vals[k];
                const double* xr = x.row_ptr(cols[k]);
                for (Index j = 0; j < d; ++j) o[j] += v * xr[j];
            }
        }
    }, 256);
}

DenseMatrix spmm(const SparseBinaryMatrix& m, const DenseMatrix& x) {
    DenseMatrix out(m.n_rows(), x.n_cols());
    spmm_into(m, x, out);
    return out;
}

SparseBinaryMatrix dropout_nonzeros(const SparseBinaryMatrix& m, double p, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout_nonzeros: p must be in [0, 1)");
    if (p == 0.0) return m;
    const double scale = 1.0 / (1.0 - p);
    std::vector<Index> offs(m.n_rows() + 1, 0), cols;
    std::vector<double> vals;
    for (Index r = 0; r < m.n_rows(); ++r) {
        auto rc = m.row_cols(r);
        auto rv = m.row_vals(r);
        for (Index k = 0; k < rc.size(); ++k) {
            if (rng.uniform() >= p) {
                cols.push_back(rc[k]);
                vals.push_back(rv[k] * scale);
            }
        }
        offs[r + 1] = cols.size();
    }
    return SparseBinaryMatrix(m.n_rows(), m.n_cols(), std::move(offs), std::move(cols),
                              std::move(vals));
}

}  // namespace hed

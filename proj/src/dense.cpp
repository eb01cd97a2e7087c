#include "hed/dense.hpp"

#include <cmath>

#include "hed/error.hpp"
#include "hed/parallel.hpp"

namespace hed {

DenseMatrix::DenseMatrix(Index n_rows, Index n_cols)
    : rows_(n_rows), cols_(n_cols), data_(n_rows * n_cols, 0.0) {}

DenseMatrix::DenseMatrix(Index n_rows, Index n_cols, std::vector<double> data)
    : rows_(n_rows), cols_(n_cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw Error("DenseMatrix: data size does not match shape");
}

DenseMatrix DenseMatrix::identity(Index n) {
    DenseMatrix m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void DenseMatrix::fill(double v) {
    for (auto& x : data_) x = v;
}

bool DenseMatrix::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

void add_scaled(DenseMatrix& dst, const DenseMatrix& src, double c) {
    if (dst.n_rows() != src.n_rows() || dst.n_cols() != src.n_cols())
        throw Error("add_scaled: shape mismatch");
    auto d = dst.data();
    auto s = src.data();
    for (Index i = 0; i < d.size(); ++i) d[i] += c * s[i];
}

DenseMatrix block_rows(const DenseMatrix& m, Index begin, Index end) {
    if (begin > end || end > m.n_rows()) throw Error("block_rows: bad range");
    DenseMatrix out(end - begin, m.n_cols());
    for (Index r = begin; r < end; ++r) {
        auto src = m.row(r);
        auto dst = out.row(r - begin);
        for (Index c = 0; c < m.n_cols(); ++c) dst[c] = src[c];
    }
    return out;
}

void set_block_rows(DenseMatrix& dst, Index begin, const DenseMatrix& src) {
    if (begin + src.n_rows() > dst.n_rows() || src.n_cols() != dst.n_cols())
        throw Error("set_block_rows: bad range");
    for (Index r = 0; r < src.n_rows(); ++r) {
        auto s = src.row(r);
        auto d = dst.row(begin + r);
        for (Index c = 0; c < src.n_cols(); ++c) d[c] = s[c];
    }
}

void add_scaled_block_rows(DenseMatrix& dst, Index begin, const DenseMatrix& src, double c) {
    if (begin + src.n_rows() > dst.n_rows() || src.n_cols() != dst.n_cols())
        throw Error("add_scaled_block_rows: bad range");
    for (Index r = 0; r < src.n_rows(); ++r) {
        auto s = src.row(r);
        auto d = dst.row(begin + r);
        for (Index col = 0; col < src.n_cols(); ++col) d[col] += c * s[col];
    }
}

void scale_rows(DenseMatrix& m, std::span<const double> s) {
    if (s.size() != m.n_rows()) throw Error("scale_rows: scale size mismatch");
    for (Index r = 0; r < m.n_rows(); ++r) {
        double f = s[r];
        auto row = m.row(r);
        for (auto& x : row) x *= f;
    }
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols())
        throw Error("max_abs_diff: shape mismatch");
    double m = 0.0;
    auto da = a.data();
    auto db = b.data();
    for (Index i = 0; i < da.size(); ++i) {
        double d = std::fabs(da[i] - db[i]);
        if (d > m) m = d;
    }
    return m;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.n_cols() != b.n_cols()) throw Error("matmul_nt: inner dimension mismatch");
    DenseMatrix out(a.n_rows(), b.n_rows());
    parallel_for(a.n_rows(), [&](Index lo, Index hi) {
        for (Index i = lo; i < hi; ++i) {
            auto ra = a.row(i);
            auto ro = out.row(i);
            for (Index j = 0; j < b.n_rows(); ++j) {
                auto rb = b.row(j);
                double acc = 0.0;
                for (Index k = 0; k < a.n_cols(); ++k) acc += ra[k] * rb[k];
                ro[j] = acc;
            }
        }
    });
    return out;
}

}  // namespace hed

#pragma once

#include <algorithm>
#include <string>

#include "paracflow/core/common.hpp"

namespace paracflow::numkit {

/// Dense row-major matrix of doubles. The universal numeric carrier for
/// weights, Jacobians and the ascend matrix.
struct Mat {
    int rows = 0;
    int cols = 0;
    Vec data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t size() const { return data.size(); }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

/// y = M x
inline Vec matvec(const Mat& m, Span x) {
    check_shape(static_cast<int>(x.size()) == m.cols, "matvec: size mismatch");
    Vec y(m.rows, 0.0);
    const double* row = m.data.data();
    for (int r = 0; r < m.rows; ++r, row += m.cols) {
        double s = 0.0;
        for (int c = 0; c < m.cols; ++c) s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

/// y += Mᵀ x  (adjoint of matvec w.r.t. its input)
inline void matvec_t_acc(const Mat& m, Span x, MutSpan y) {
    check_shape(static_cast<int>(x.size()) == m.rows && static_cast<int>(y.size()) == m.cols,
                "matvec_t_acc: size mismatch");
    const double* row = m.data.data();
    for (int r = 0; r < m.rows; ++r, row += m.cols) {
        const double xr = x[r];
        for (int c = 0; c < m.cols; ++c) y[c] += row[c] * xr;
    }
}

/// A += u vᵀ
inline void outer_acc(Mat& a, Span u, Span v) {
    check_shape(static_cast<int>(u.size()) == a.rows && static_cast<int>(v.size()) == a.cols,
                "outer_acc: size mismatch");
    double* row = a.data.data();
    for (int r = 0; r < a.rows; ++r, row += a.cols) {
        const double ur = u[r];
        for (int c = 0; c < a.cols; ++c) row[c] += ur * v[c];
    }
}

/// Row vector times matrix: (xᵀ M)ᵀ, length cols.
inline Vec vecmat(Span x, const Mat& m) {
    check_shape(static_cast<int>(x.size()) == m.rows, "vecmat: size mismatch");
    Vec y(m.cols, 0.0);
    const double* row = m.data.data();
    for (int r = 0; r < m.rows; ++r, row += m.cols) {
        const double xr = x[r];
        for (int c = 0; c < m.cols; ++c) y[c] += row[c] * xr;
    }
    return y;
}

inline void axpy(double a, Span x, MutSpan y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace paracflow::numkit

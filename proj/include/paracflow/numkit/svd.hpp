#pragma once

#include <algorithm>
#include <cmath>

#include "paracflow/numkit/mat.hpp"

namespace paracflow::numkit {

/// Singular values by one-sided Jacobi rotations, descending order.
/// Sized for the small Jacobians this project inspects (dims ≤ a few dozen).
inline Vec singular_values(const Mat& a_in) {
    // Work with m >= n by transposing if needed; singular values are shared.
    Mat a = a_in;
    if (a.rows < a.cols) {
        Mat t(a.cols, a.rows);
        for (int r = 0; r < a.rows; ++r)
            for (int c = 0; c < a.cols; ++c) t(c, r) = a(r, c);
        a = std::move(t);
    }
    const int m = a.rows, n = a.cols;
    auto col_dot = [&](int i, int j) {
        double s = 0.0;
        for (int r = 0; r < m; ++r) s += a(r, i) * a(r, j);
        return s;
    };

    const double tol = 1e-14;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (int i = 0; i < n - 1; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double aii = col_dot(i, i);
                const double ajj = col_dot(j, j);
                const double aij = col_dot(i, j);
                if (std::abs(aij) <= tol * std::sqrt(aii * ajj) || aij == 0.0) continue;
                rotated = true;
                const double zeta = (ajj - aii) / (2.0 * aij);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int r = 0; r < m; ++r) {
                    const double x = a(r, i), y = a(r, j);
                    a(r, i) = c * x - s * y;
                    a(r, j) = s * x + c * y;
                }
            }
        }
        if (!rotated) break;
    }

    Vec sv(n, 0.0);
    for (int i = 0; i < n; ++i) sv[i] = std::sqrt(std::max(0.0, col_dot(i, i)));
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

/// Count of singular values above rel_tol times the largest.
inline int numerical_rank(const Mat& a, double rel_tol = 1e-8) {
    Vec sv = singular_values(a);
    if (sv.empty() || sv[0] == 0.0) return 0;
    int r = 0;
    for (double s : sv)
        if (s > rel_tol * sv[0]) ++r;
    return r;
}

}  // namespace paracflow::numkit

#pragma once

#include <functional>

#include "paracflow/diffeo/grid.hpp"
#include "paracflow/numkit/fd.hpp"

namespace paracflow::diffeo {

using numkit::Mat;

/// Numeric handle on a map R^d → R^d that equals the identity outside its
/// support box. The Jacobian callable is optional; central differences are
/// the fallback.
struct SmoothMap {
    int dim = 0;
    std::function<Vec(Span)> eval;
    std::function<Mat(Span)> jac;  // may be empty
    Vec support_lo, support_hi;

    Vec operator()(Span x) const { return eval(x); }

    Mat jacobian(const Vec& x, double fd_step = 1e-6) const {
        if (jac) return jac(x);
        return numkit::fd_jacobian(eval, x, fd_step);
    }

    static SmoothMap identity(int d, double box = 1.0) {
        SmoothMap f;
        f.dim = d;
        f.eval = [](Span x) { return Vec(x.begin(), x.end()); };
        f.jac = [d](Span) { return Mat::identity(d); };
        f.support_lo.assign(d, -box);
        f.support_hi.assign(d, box);
        return f;
    }
};

/// Grid-discretized C¹ distance from the identity:
/// max over grid points of max(‖f(x) − x‖_∞, max entry |Df(x) − I|).
/// Zero for the identity map.
inline double near_identity_delta(const SmoothMap& f, const GridSpec& grid,
                                  double fd_step = 1e-6) {
    grid.validate();
    check_shape(grid.dim() == f.dim, "near_identity_delta: grid dim mismatch");
    double delta = 0.0;
    for_each_point(grid, [&](const Vec& x) {
        const Vec y = f(x);
        for (int i = 0; i < f.dim; ++i) delta = std::max(delta, std::abs(y[i] - x[i]));
        const Mat j = f.jacobian(x, fd_step);
        for (int r = 0; r < f.dim; ++r)
            for (int c = 0; c < f.dim; ++c) {
                const double target = r == c ? 1.0 : 0.0;
                delta = std::max(delta, std::abs(j(r, c) - target));
            }
    });
    return delta;
}

/// Grid sup of ‖f(x) − g(x)‖_∞.
inline double sup_distance(const SmoothMap& f, const SmoothMap& g, const GridSpec& grid) {
    double m = 0.0;
    for_each_point(grid, [&](const Vec& x) {
        const Vec a = f(x), b = g(x);
        for (int i = 0; i < f.dim; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    });
    return m;
}

}  // namespace paracflow::diffeo

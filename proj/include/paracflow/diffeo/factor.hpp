#pragma once

#include <functional>
#include <memory>

#include "paracflow/diffeo/smooth_map.hpp"

namespace paracflow::diffeo {

/// One factor of a diffeomorphism decomposition: alters exactly one
/// coordinate, strictly monotone in that coordinate on its box.
struct SingleCoordinateFactor {
    int dim = 0;
    int coord = 0;  // 0-based index of the altered coordinate
    std::function<double(Span)> tau;
    Vec support_lo, support_hi;

    /// All coordinates except `coord` are copied bit-exactly.
    Vec apply(Span x) const {
        Vec y(x.begin(), x.end());
        y[coord] = tau(x);
        return y;
    }

    /// ∂τ/∂x_coord by central differences.
    double dtau_dcoord(const Vec& x, double h = 1e-6) const {
        Vec xp = x;
        xp[coord] = x[coord] + h;
        const double fp = tau(xp);
        xp[coord] = x[coord] - h;
        const double fm = tau(xp);
        return (fp - fm) / (2.0 * h);
    }
};

/// Compose factors into a SmoothMap. Factors are applied in list order
/// (factors.front() first); the Jacobian is the chain-rule product of the
/// per-factor Jacobians.
inline SmoothMap compose_factors(std::vector<SingleCoordinateFactor> factors, int dim_hint = 0) {
    const int d = factors.empty() ? dim_hint : factors.front().dim;
    check_shape(d > 0, "compose_factors: empty list needs a dimension hint");
    for (const auto& f : factors)
        check_shape(f.dim == d, "compose_factors: factor dimension mismatch");

    SmoothMap m;
    m.dim = d;
    if (!factors.empty()) {
        m.support_lo = factors.front().support_lo;
        m.support_hi = factors.front().support_hi;
    } else {
        m.support_lo.assign(d, -1.0);
        m.support_hi.assign(d, 1.0);
    }
    auto fs = std::make_shared<std::vector<SingleCoordinateFactor>>(std::move(factors));
    m.eval = [fs](Span x) {
        Vec u(x.begin(), x.end());
        for (const auto& f : *fs) u = f.apply(u);
        return u;
    };
    m.jac = [fs, d](Span x) {
        Mat j = Mat::identity(d);
        Vec u(x.begin(), x.end());
        for (const auto& f : *fs) {
            // Jacobian of a single-coordinate factor: identity with row
            // `coord` replaced by the gradient of tau.
            Vec grad(d, 0.0);
            Vec xp = u;
            const double h = 1e-6;
            for (int k = 0; k < d; ++k) {
                xp[k] = u[k] + h;
                const double fp = f.tau(xp);
                xp[k] = u[k] - h;
                const double fm = f.tau(xp);
                xp[k] = u[k];
                grad[k] = (fp - fm) / (2.0 * h);
            }
            Mat jf = Mat::identity(d);
            for (int k = 0; k < d; ++k) jf(f.coord, k) = grad[k];
            // j = jf * j
            Mat next(d, d);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) {
                    double s = 0.0;
                    for (int k = 0; k < d; ++k) s += jf(r, k) * j(k, c);
                    next(r, c) = s;
                }
            j = std::move(next);
            u = f.apply(u);
        }
        return j;
    };
    return m;
}

}  // namespace paracflow::diffeo

#pragma once

#include <utility>

#include "paracflow/core/common.hpp"
#include "paracflow/numkit/mat.hpp"

namespace paracflow::numkit {

/// Central-difference Jacobian: entry (i,j) = (fᵢ(x+h eⱼ) − fᵢ(x−h eⱼ)) / 2h.
/// The independent derivative oracle used by every gradient check.
template <class F>
Mat fd_jacobian(F&& f, const Vec& x, double h = 1e-5) {
    Vec xp = x;
    Vec f0 = f(Span(x));
    Mat jac(static_cast<int>(f0.size()), static_cast<int>(x.size()));
    for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + h;
        Vec fp = f(Span(xp));
        xp[j] = x[j] - h;
        Vec fm = f(Span(xp));
        xp[j] = x[j];
        for (std::size_t i = 0; i < fp.size(); ++i)
            jac(static_cast<int>(i), static_cast<int>(j)) = (fp[i] - fm[i]) / (2.0 * h);
    }
    return jac;
}

/// Scalar-output convenience: gradient row as a Vec.
template <class F>
Vec fd_gradient(F&& f, const Vec& x, double h = 1e-5) {
    Vec g(x.size(), 0.0);
    Vec xp = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + h;
        const double fp = f(Span(xp));
        xp[j] = x[j] - h;
        const double fm = f(Span(xp));
        xp[j] = x[j];
        g[j] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace paracflow::numkit

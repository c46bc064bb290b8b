#pragma once

#include <cmath>

#include "paracflow/core/common.hpp"

namespace paracflow::diffeo {

/// Solve g(t) = target for a scalar function that is strictly increasing in
/// the region of interest. Brackets by expanding around `hint`, then runs
/// safeguarded Newton (secant slope) with bisection fallback. Throws
/// PreconditionError when no sign change exists inside [lo, hi], which is how
/// a non-monotone slice announces itself.
template <class G>
double invert_monotone(G&& g, double target, double hint, double lo, double hi,
                       double tol = 1e-13) {
    auto r = [&](double t) { return g(t) - target; };

    double a = std::clamp(hint, lo, hi);
    double ra = r(a);
    if (std::abs(ra) <= tol) return a;

    // Expand a bracket around the hint; near-identity slices put the root
    // within O(delta) of it.
    double b = a, rb = ra;
    double step = 0.0625 * (1.0 + std::abs(hint));
    bool bracketed = false;
    for (int k = 0; k < 64 && !bracketed; ++k) {
        if (ra > 0.0) {  // increasing g: root to the left
            b = a;
            rb = ra;
            a = std::max(lo, a - step);
            ra = r(a);
        } else {
            a = b;
            ra = rb;
            b = std::min(hi, b + step);
            rb = r(b);
        }
        if (ra <= 0.0 && rb >= 0.0) bracketed = true;
        if ((a <= lo && ra > 0.0) || (b >= hi && rb < 0.0)) break;
        step *= 2.0;
    }
    if (!bracketed) {
        if (std::abs(ra) <= tol) return a;
        if (std::abs(rb) <= tol) return b;
        throw PreconditionError("invert_monotone: no bracketing interval in bounds");
    }
    if (ra == 0.0) return a;
    if (rb == 0.0) return b;

    double x = a, rx = ra;
    double x_prev = b, rx_prev = rb;
    for (int it = 0; it < 200; ++it) {
        double cand;
        const double denom = rx - rx_prev;
        if (denom != 0.0) {
            cand = x - rx * (x - x_prev) / denom;  // secant step
        } else {
            cand = 0.5 * (a + b);
        }
        if (!(cand > a && cand < b)) cand = 0.5 * (a + b);  // safeguard: bisect
        const double rc = r(cand);
        x_prev = x;
        rx_prev = rx;
        x = cand;
        rx = rc;
        if (std::abs(rc) <= tol) return cand;
        if (rc < 0.0) {
            a = cand;
            ra = rc;
        } else {
            b = cand;
            rb = rc;
        }
        if (b - a <= 1e-16 * (1.0 + std::abs(a))) break;
    }
    return 0.5 * (a + b);
}

}  // namespace paracflow::diffeo

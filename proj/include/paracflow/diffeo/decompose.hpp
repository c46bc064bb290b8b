#pragma once

#include <memory>
#include <string>

#include "paracflow/diffeo/factor.hpp"
#include "paracflow/diffeo/root_find.hpp"

namespace paracflow::diffeo {

struct DecomposeConfig {
    double fd_step = 1e-6;
    double root_tol = 1e-12;
    /// Practical near-identity threshold; 0 selects min(0.2, 1/(2(d−1))).
    double delta_threshold = 0.0;
    bool enforce_threshold = true;
};

inline double practical_delta_threshold(int dim, const DecomposeConfig& cfg) {
    if (cfg.delta_threshold > 0.0) return cfg.delta_threshold;
    if (dim <= 1) return 0.2;
    return std::min(0.2, 0.5 / (dim - 1));
}

namespace detail {

struct DeltaStats {
    double delta = 0.0;            // C¹ distance from the identity on the grid
    double min_slice_deriv = 1.0;  // min over the grid of ∂f_coord/∂x_coord
};

inline DeltaStats delta_stats(const SmoothMap& f, const GridSpec& grid, int coord,
                              double fd_step) {
    DeltaStats st;
    for_each_point(grid, [&](const Vec& x) {
        const Vec y = f(x);
        for (int i = 0; i < f.dim; ++i) st.delta = std::max(st.delta, std::abs(y[i] - x[i]));
        const numkit::Mat j = f.jacobian(x, fd_step);
        for (int r = 0; r < f.dim; ++r)
            for (int c = 0; c < f.dim; ++c) {
                const double target = r == c ? 1.0 : 0.0;
                st.delta = std::max(st.delta, std::abs(j(r, c) - target));
            }
        st.min_slice_deriv = std::min(st.min_slice_deriv, j(coord, coord));
    });
    return st;
}

/// Split coordinate `coord` off a map that already preserves all coordinates
/// above `coord`. Returns the remainder g (preserving coordinates >= coord)
/// and the factor h (altering only `coord`); F = g ∘ h up to root-finder
/// tolerance.
struct CoordinateSplit {
    SmoothMap g;
    SingleCoordinateFactor h;
};

inline CoordinateSplit split_coordinate(const SmoothMap& f, int coord, double root_tol) {
    const int d = f.dim;
    check_shape(coord >= 0 && coord < d, "split_coordinate: coordinate out of range");
    auto fptr = std::make_shared<SmoothMap>(f);
    const double lo = f.support_lo[coord] - 1.0;
    const double hi = f.support_hi[coord] + 1.0;

    CoordinateSplit out;
    out.h.dim = d;
    out.h.coord = coord;
    out.h.support_lo = f.support_lo;
    out.h.support_hi = f.support_hi;
    out.h.tau = [fptr, coord](Span x) { return (*fptr)(x)[coord]; };

    out.g.dim = d;
    out.g.support_lo = f.support_lo;
    out.g.support_hi = f.support_hi;
    out.g.eval = [fptr, coord, lo, hi, root_tol](Span x) {
        // g(x) = f(x with x_coord replaced by the slice preimage of x_coord);
        // coordinate `coord` of the result is x_coord by construction.
        Vec probe(x.begin(), x.end());
        auto slice = [&](double t) {
            probe[coord] = t;
            return (*fptr)(probe)[coord];
        };
        const double lo_t = std::min(lo, x[coord] - 1.0);
        const double hi_t = std::max(hi, x[coord] + 1.0);
        const double t = invert_monotone(slice, x[coord], x[coord], lo_t, hi_t, root_tol);
        probe[coord] = t;
        Vec y = (*fptr)(probe);
        y[coord] = x[coord];
        return y;
    };
    return out;
}

}  // namespace detail

/// Split the last coordinate of a near-identity map f into f = g ∘ h, where
/// h alters only the last coordinate and g preserves it. The slice inverse is
/// found by safeguarded bisection+Newton, legal because the slice derivative
/// is within delta of 1.
struct SplitResult {
    SmoothMap g;
    SingleCoordinateFactor h;
    double delta_f = 0.0;
};

inline SplitResult split_last_coordinate(const SmoothMap& f, const GridSpec& grid,
                                         const DecomposeConfig& cfg = {}) {
    grid.validate();
    const auto stats = detail::delta_stats(f, grid, f.dim - 1, cfg.fd_step);
    if (stats.min_slice_deriv <= 0.0)
        throw PreconditionError(
            "split_last_coordinate: non-monotone last-coordinate slice (min derivative " +
            std::to_string(stats.min_slice_deriv) + " on the grid)");
    const double threshold = practical_delta_threshold(f.dim, cfg);
    if (cfg.enforce_threshold && stats.delta >= threshold)
        throw PreconditionError("split_last_coordinate: measured delta " +
                                std::to_string(stats.delta) + " is not below threshold " +
                                std::to_string(threshold));
    auto split = detail::split_coordinate(f, f.dim - 1, cfg.root_tol);
    return {std::move(split.g), std::move(split.h), stats.delta};
}

struct LevelReport {
    int coord = 0;      // coordinate split at this level (0-based)
    double delta = 0.0; // measured near-identity delta before the split
};

struct Decomposition {
    std::vector<SingleCoordinateFactor> factors;  // front altered coordinate d-1, back coordinate 0
    std::vector<LevelReport> levels;
};

/// Factor a near-identity map into exactly d single-coordinate transforms by
/// repeatedly splitting the highest unpreserved coordinate off the remainder.
/// Composing the factors in list order reproduces f on the grid within
/// root-finder tolerance.
inline Decomposition decompose_near_identity(const SmoothMap& f, const GridSpec& grid,
                                             const DecomposeConfig& cfg = {}) {
    grid.validate();
    check_shape(grid.dim() == f.dim, "decompose: grid dimension mismatch");
    const int d = f.dim;
    const double threshold = std::min(practical_delta_threshold(d, cfg),
                                      d >= 2 ? 1.0 / (d - 1) : 1.0);

    Decomposition out;
    SmoothMap current = f;
    for (int coord = d - 1; coord >= 0; --coord) {
        const auto stats = detail::delta_stats(current, grid, coord, cfg.fd_step);
        if (stats.min_slice_deriv <= 0.0)
            throw PreconditionError("decompose_near_identity: non-monotone slice at level for "
                                    "coordinate " +
                                    std::to_string(coord + 1));
        if (cfg.enforce_threshold && stats.delta >= threshold)
            throw PreconditionError(
                "decompose_near_identity: at level for coordinate " + std::to_string(coord + 1) +
                " measured delta " + std::to_string(stats.delta) + " is not below threshold " +
                std::to_string(threshold));
        out.levels.push_back({coord, stats.delta});
        auto split = detail::split_coordinate(current, coord, cfg.root_tol);
        out.factors.push_back(std::move(split.h));
        if (coord > 0) current = std::move(split.g);
    }
    return out;
}

}  // namespace paracflow::diffeo

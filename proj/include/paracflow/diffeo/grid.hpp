#pragma once

#include <vector>

#include "paracflow/core/common.hpp"

namespace paracflow::diffeo {

/// Axis-aligned evaluation grid used to discretize sup-norms. Grid density is
/// caller-controlled and reported with every result that depends on it.
struct GridSpec {
    Vec lo, hi;
    std::vector<int> points;  // >= 2 per axis

    int dim() const { return static_cast<int>(points.size()); }

    void validate() const {
        check_shape(lo.size() == points.size() && hi.size() == points.size(),
                    "grid: bounds/points size mismatch");
        for (int d = 0; d < dim(); ++d) {
            check_shape(points[d] >= 2, "grid: need >= 2 points per axis");
            if (!std::isfinite(lo[d]) || !std::isfinite(hi[d]) || lo[d] >= hi[d])
                throw ShapeError("grid: invalid bounds");
        }
    }

    std::size_t total() const {
        std::size_t n = 1;
        for (int p : points) n *= static_cast<std::size_t>(p);
        return n;
    }

    double coord(int axis, int idx) const {
        return lo[axis] + (hi[axis] - lo[axis]) * idx / (points[axis] - 1);
    }

    Vec point(std::size_t flat) const {
        Vec x(dim());
        for (int axis = dim() - 1; axis >= 0; --axis) {
            const std::size_t n = points[axis];
            x[axis] = coord(axis, static_cast<int>(flat % n));
            flat /= n;
        }
        return x;
    }

    static GridSpec uniform(int d, double lo, double hi, int n) {
        GridSpec g;
        g.lo.assign(d, lo);
        g.hi.assign(d, hi);
        g.points.assign(d, n);
        return g;
    }
};

template <class Fn>
void for_each_point(const GridSpec& grid, Fn&& fn) {
    const std::size_t n = grid.total();
    for (std::size_t i = 0; i < n; ++i) fn(grid.point(i));
}

}  // namespace paracflow::diffeo

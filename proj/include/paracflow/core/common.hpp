#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace paracflow {

using Vec = std::vector<double>;
using Span = std::span<const double>;
using MutSpan = std::span<double>;

/// Dimension / shape mismatch between arguments.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Operation called in the wrong order (e.g. backward before forward).
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Non-finite value produced where a finite one is required.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A stated mathematical precondition does not hold for the given input.
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void check_shape(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

inline bool all_finite(Span v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline void require_finite(Span v, const std::string& what) {
    if (!all_finite(v)) throw NumericError("non-finite value in " + what);
}

inline double norm_inf(Span v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double norm2(Span v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dot(Span a, Span b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec concat(Span a, Span b) {
    Vec r;
    r.reserve(a.size() + b.size());
    r.insert(r.end(), a.begin(), a.end());
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

}  // namespace paracflow

#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "paracflow/core/common.hpp"
#include "paracflow/core/rng.hpp"

namespace paracflow::cbo {

enum class BenchmarkKind { ackley, trid, rastrigin };

inline const char* benchmark_name(BenchmarkKind k) {
    switch (k) {
        case BenchmarkKind::ackley: return "ackley";
        case BenchmarkKind::trid: return "trid";
        default: return "rastrigin";
    }
}

/// Canonical forms. With the context-first layout these realize the three
/// coupling structures: Ackley couples the action with every context
/// dimension, Trid with exactly one, Rastrigin with none.
inline double benchmark_eval(BenchmarkKind kind, Span z) {
    check_shape(!z.empty(), "benchmark_eval: empty input");
    const double d = static_cast<double>(z.size());
    switch (kind) {
        case BenchmarkKind::ackley: {
            double sq = 0.0, cs = 0.0;
            for (double v : z) {
                sq += v * v;
                cs += std::cos(2.0 * std::numbers::pi * v);
            }
            return -20.0 * std::exp(-0.2 * std::sqrt(sq / d)) - std::exp(cs / d) + 20.0 +
                   std::numbers::e;
        }
        case BenchmarkKind::trid: {
            double s = 0.0;
            for (double v : z) s += (v - 1.0) * (v - 1.0);
            for (std::size_t i = 1; i < z.size(); ++i) s -= z[i] * z[i - 1];
            return s;
        }
        default: {
            double s = 10.0 * d;
            for (double v : z) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
            return s;
        }
    }
}

/// Exhaustive scan of an action grid; ties broken by the smallest action.
template <class F>
std::pair<double, double> best_on_grid(Span grid, F&& value_at) {
    double best_a = grid[0];
    double best_v = value_at(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double v = value_at(grid[i]);
        if (v < best_v) {
            best_v = v;
            best_a = grid[i];
        }
    }
    return {best_a, best_v};
}

/// Contextualized benchmark: the first d_c input dimensions are the context,
/// the last is the action, optimized over 100 evenly spaced points on [-3,3].
/// Objective sense is minimization.
struct ContextualProblem {
    BenchmarkKind kind = BenchmarkKind::trid;
    int context_dim = 5;

    static constexpr int kGridSize = 100;
    static constexpr double kBoxLo = -3.0;
    static constexpr double kBoxHi = 3.0;

    int dim() const { return context_dim + 1; }

    Vec action_grid() const {
        Vec g(kGridSize);
        for (int i = 0; i < kGridSize; ++i)
            g[i] = kBoxLo + (kBoxHi - kBoxLo) * i / (kGridSize - 1);
        return g;
    }

    double eval(Span c, double a) const {
        check_shape(static_cast<int>(c.size()) == context_dim,
                    "ContextualProblem::eval: context size mismatch");
        Vec z(c.begin(), c.end());
        z.push_back(a);
        return benchmark_eval(kind, z);
    }

    std::pair<double, double> best(Span c, Span grid) const {
        return best_on_grid(grid, [&](double a) { return eval(c, a); });
    }

    Vec sample_context(Rng& rng) const {
        Vec c(context_dim);
        for (double& v : c) v = rng.uniform(kBoxLo, kBoxHi);
        return c;
    }
};

}  // namespace paracflow::cbo

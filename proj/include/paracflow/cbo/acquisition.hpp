#pragma once

#include "paracflow/cbo/surrogates.hpp"

namespace paracflow::cbo {

/// Lower confidence bound under minimization: argmin of mean − κ·std over the
/// grid, ties broken by the smallest action. `maximize` flips the mean's sign
/// so the same optimistic rule serves both senses.
inline double acquire_lcb(const SurrogateEnsemble& ens, Span c, Span grid, double kappa,
                          bool maximize = false) {
    check_shape(kappa >= 0.0, "acquire_lcb: kappa must be >= 0");
    check_shape(!grid.empty(), "acquire_lcb: empty grid");
    double best_a = grid[0];
    double best_score = std::numeric_limits<double>::infinity();
    for (double a : grid) {
        const auto [mean, sd] = ens.predict(c, a);
        const double score = (maximize ? -mean : mean) - kappa * sd;
        if (score < best_score) {
            best_score = score;
            best_a = a;
        }
    }
    return best_a;
}

/// Thompson sampling over ensemble members: draw one member uniformly and
/// return its greedy argmin (argmax under maximization), ties to the smallest
/// action.
inline double acquire_thompson(const SurrogateEnsemble& ens, Span c, Span grid, Rng& rng,
                               bool maximize = false) {
    check_shape(!grid.empty(), "acquire_thompson: empty grid");
    if (!ens.trained()) throw StateError("acquire_thompson: ensemble has not been fitted");
    const int pick = rng.uniform_int(ens.size());
    double best_a = grid[0];
    double best_v = std::numeric_limits<double>::infinity();
    for (double a : grid) {
        double v = ens.member_predict(pick, c, a);
        if (maximize) v = -v;
        if (v < best_v) {
            best_v = v;
            best_a = a;
        }
    }
    return best_a;
}

}  // namespace paracflow::cbo

#pragma once

#include <cmath>

#include "paracflow/core/common.hpp"

namespace paracflow::cbo {

/// Kendall's tau-b between two equally long value sequences:
/// (C − D) / sqrt((C + D + T_pred)(C + D + T_truth)), where T counts pairs
/// tied in exactly one of the sequences and pairs tied in both are ignored.
/// Returns the flagged value 0 when the denominator vanishes (e.g. all
/// predictions tied).
inline double kendall_tau(Span pred, Span truth) {
    check_shape(pred.size() == truth.size() && pred.size() >= 2,
                "kendall_tau: need two sequences of equal length >= 2");
    long long concordant = 0, discordant = 0, ties_pred = 0, ties_truth = 0;
    const std::size_t n = pred.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dp = pred[i] - pred[j];
            const double dt = truth[i] - truth[j];
            if (dp == 0.0 && dt == 0.0) continue;
            if (dp == 0.0)
                ++ties_pred;
            else if (dt == 0.0)
                ++ties_truth;
            else if (dp * dt > 0.0)
                ++concordant;
            else
                ++discordant;
        }
    }
    const double np = static_cast<double>(concordant + discordant + ties_pred);
    const double nt = static_cast<double>(concordant + discordant + ties_truth);
    const double denom = std::sqrt(np) * std::sqrt(nt);
    if (denom == 0.0) return 0.0;
    return static_cast<double>(concordant - discordant) / denom;
}

}  // namespace paracflow::cbo

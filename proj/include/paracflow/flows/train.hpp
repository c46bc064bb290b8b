#pragma once

#include <numeric>
#include <span>

#include "paracflow/flows/model.hpp"

namespace paracflow::flows {

struct TrainConfig {
    int batch_size = 64;
    int epochs = 200;
    double lr = 0.01;
    std::uint64_t seed = 0;
    double lr_decay = 1.0;  // per-epoch multiplicative factor
};

struct ScalarSample {
    Vec c;
    Vec a;
    double b = 0.0;
};

struct VectorSample {
    Vec c;
    Vec a;
    Vec target;
};

namespace detail {
inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i)
        std::swap(idx[i - 1], idx[rng.uniform_int(static_cast<int>(i))]);
    return idx;
}
}  // namespace detail

/// Minimize (1/M) Σ (bⱼ − b̂(φ(cⱼ,aⱼ)))² with minibatch Adam.
/// Returns the per-epoch mean training loss.
inline std::vector<double> train_mse(ParaCFlowModel& m, std::span<const ScalarSample> data,
                                     const TrainConfig& cfg) {
    check_shape(!data.empty(), "train_mse: empty dataset");
    auto params = trainable_params(m);
    ModelGrads grads = ModelGrads::zeros_like(m);
    auto grad_views = gradient_views(m, grads);
    numkit::AdamState adam(params);
    Rng rng(Rng::derive(cfg.seed, "train_mse"));

    std::vector<double> trace;
    ModelTape tape;
    double lr = cfg.lr;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto idx = detail::shuffled_indices(data.size(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < idx.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(idx.size(), start + cfg.batch_size);
            const double inv_n = 1.0 / static_cast<double>(stop - start);
            grads.clear();
            for (std::size_t k = start; k < stop; ++k) {
                const auto& s = data[idx[k]];
                const double pred = paracflow_predict(m, s.c, s.a, tape);
                const double r = pred - s.b;
                epoch_loss += r * r;
                model_backward_predict(m, tape, 2.0 * r * inv_n, grads);
            }
            adam.step(params, grad_views, lr);
        }
        trace.push_back(epoch_loss / static_cast<double>(data.size()));
        lr *= cfg.lr_decay;
    }
    return trace;
}

/// Minimize the MSE of the leading `target_dim` feature coordinates against
/// vector targets (the head is not involved). Used by tasks that read the
/// flow output directly.
inline std::vector<double> train_feature_mse(ParaCFlowModel& m,
                                             std::span<const VectorSample> data,
                                             const TrainConfig& cfg, int target_dim) {
    check_shape(!data.empty(), "train_feature_mse: empty dataset");
    check_shape(target_dim >= 1 && target_dim <= m.width,
                "train_feature_mse: bad target_dim");
    auto params = trainable_params(m, /*include_head=*/false);
    ModelGrads grads = ModelGrads::zeros_like(m);
    auto grad_views = gradient_views(m, grads, /*include_head=*/false);
    numkit::AdamState adam(params);
    Rng rng(Rng::derive(cfg.seed, "train_feature_mse"));

    std::vector<double> trace;
    ModelTape tape;
    Vec dfeat(m.width, 0.0);
    double lr = cfg.lr;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto idx = detail::shuffled_indices(data.size(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < idx.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(idx.size(), start + cfg.batch_size);
            const double inv_n = 1.0 / static_cast<double>(stop - start);
            grads.clear();
            for (std::size_t k = start; k < stop; ++k) {
                const auto& s = data[idx[k]];
                const Vec f = paracflow_features(m, s.c, s.a, tape);
                std::fill(dfeat.begin(), dfeat.end(), 0.0);
                for (int i = 0; i < target_dim; ++i) {
                    const double r = f[i] - s.target[i];
                    epoch_loss += r * r;
                    dfeat[i] = 2.0 * r * inv_n;
                }
                model_backward_features(m, tape, dfeat, grads);
            }
            adam.step(params, grad_views, lr);
        }
        trace.push_back(epoch_loss / static_cast<double>(data.size()));
        lr *= cfg.lr_decay;
    }
    return trace;
}

}  // namespace paracflow::flows

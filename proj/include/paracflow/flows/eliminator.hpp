#pragma once

#include <span>

#include "paracflow/flows/train.hpp"

namespace paracflow::flows {

/// Coupling stack appended after a padded flow, trained to drive the
/// auxiliary coordinates of the flow output to zero so the padded flow can be
/// inverted from its leading block alone. Layers are additive (σ-nets frozen
/// at zero): the affine family admits a degenerate σ → −∞ optimum that
/// destroys inverse conditioning, so only the shift networks are fitted.
struct Eliminator {
    int width = 0;
    int lead = 0;  // pass-through block [0, lead); auxiliary block [lead, width)
    std::vector<CouplingLayer> layers;

    int aux_dim() const { return width - lead; }
};

struct ElimConfig {
    int num_layers = 2;
    std::vector<int> hidden{64};
    numkit::Activation activation = numkit::Activation::Tanh;
    int batch_size = 64;
    int epochs = 200;
    double lr = 0.01;
    double lr_decay = 1.0;
    std::uint64_t seed = 0;
};

inline Eliminator make_eliminator(int width, int lead, int cond_dim, const ElimConfig& cfg) {
    check_shape(lead >= 1 && lead < width, "eliminator: need 1 <= lead < width");
    Eliminator e;
    e.width = width;
    e.lead = lead;
    Rng rng(Rng::derive(cfg.seed, "eliminator_init"));
    for (int i = 0; i < cfg.num_layers; ++i) {
        CouplingLayer layer = make_coupling(width, lead, cond_dim, cfg.hidden, cfg.activation,
                                            rng, numkit::InitMode::ZeroOutputLayer);
        // Freeze the scale path: zero σ-net means exp(σ) ≡ 1.
        for (auto& w : layer.sigma_net.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
        e.layers.push_back(std::move(layer));
    }
    return e;
}

inline Vec eliminator_forward(const Eliminator& e, Span c, Span z) {
    Vec u(z.begin(), z.end());
    for (const auto& layer : e.layers) u = coupling_forward(layer, c, u);
    return u;
}

inline Vec eliminator_inverse(const Eliminator& e, Span c, Span z) {
    Vec u(z.begin(), z.end());
    for (auto it = e.layers.rbegin(); it != e.layers.rend(); ++it)
        u = coupling_inverse(*it, c, u);
    return u;
}

/// Auxiliary residual o(c,a): the trailing block of eliminator ∘ flow.
inline Vec aux_residual(const ParaCFlowModel& m, const Eliminator& e, Span c, Span a) {
    const Vec z = eliminator_forward(e, c, paracflow_features(m, c, a));
    return Vec(z.begin() + e.lead, z.end());
}

/// Train the shift networks so the auxiliary block of eliminator ∘ flow is
/// near zero on the given inputs. The leading block passes through unchanged
/// by construction.
inline Eliminator fit_eliminator(const ParaCFlowModel& m, std::span<const VectorSample> data,
                                 const ElimConfig& cfg) {
    check_shape(!data.empty(), "fit_eliminator: empty dataset");
    Eliminator e = make_eliminator(m.width, m.split, m.context_dim, cfg);
    const int aux = e.aux_dim();

    // Flow outputs are fixed during elimination training; precompute them.
    std::vector<Vec> feats;
    feats.reserve(data.size());
    for (const auto& s : data) feats.push_back(paracflow_features(m, s.c, s.a));

    std::vector<numkit::ParamView> params, grad_views;
    std::vector<MlpGrads> grads;
    for (auto& layer : e.layers) {
        numkit::collect_params(layer.t_net, params);
        grads.push_back(MlpGrads::zeros_like(layer.t_net));
    }
    for (auto& g : grads) numkit::collect_params(g, grad_views);
    numkit::AdamState adam(params);
    Rng rng(Rng::derive(cfg.seed, "fit_eliminator"));

    std::vector<CouplingTape> tapes(e.layers.size());
    Vec dy(e.width, 0.0), dx;
    double lr = cfg.lr;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto idx = detail::shuffled_indices(data.size(), rng);
        for (std::size_t start = 0; start < idx.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(idx.size(), start + cfg.batch_size);
            const double inv_n = 1.0 / static_cast<double>(stop - start);
            for (auto& g : grads) g.clear();
            for (std::size_t k = start; k < stop; ++k) {
                const auto& s = data[idx[k]];
                Vec u = feats[idx[k]];
                for (std::size_t l = 0; l < e.layers.size(); ++l)
                    u = coupling_forward(e.layers[l], s.c, u, tapes[l]);
                std::fill(dy.begin(), dy.end(), 0.0);
                for (int i = 0; i < aux; ++i)
                    dy[e.lead + i] = 2.0 * u[e.lead + i] * inv_n;
                for (int l = static_cast<int>(e.layers.size()) - 1; l >= 0; --l) {
                    CouplingGrads cg{MlpGrads::zeros_like(e.layers[l].sigma_net), std::move(grads[l])};
                    coupling_backward(e.layers[l], tapes[l], dy, cg, dx);
                    grads[l] = std::move(cg.t);
                    dy = dx;
                }
            }
            adam.step(params, grad_views, lr);
        }
        lr *= cfg.lr_decay;
    }
    return e;
}

/// Invert a padded flow from the leading block of its output: assume the
/// auxiliary block of the eliminated output is zero, undo the eliminator,
/// undo the flow body, and drop the lift. Reconstruction error is bounded by
/// the eliminator residual amplified by the inverse Lipschitz constants.
inline Vec invert_padded(const ParaCFlowModel& m, const Eliminator& e, Span c, Span xhat) {
    check_shape(static_cast<int>(xhat.size()) == e.lead, "invert_padded: xhat size mismatch");
    Vec z(xhat.begin(), xhat.end());
    z.resize(m.width, 0.0);
    const Vec u = flow_inverse(m, c, eliminator_inverse(e, c, z));
    return Vec(u.begin(), u.begin() + m.action_dim);
}

}  // namespace paracflow::flows

#pragma once

#include <vector>

#include "paracflow/flows/coupling.hpp"
#include "paracflow/numkit/adam.hpp"
#include "paracflow/numkit/mat.hpp"

namespace paracflow::flows {

using numkit::Mat;

/// Rank-preserving lift a ↦ (a, aW) into the flow width.
inline Vec ascend(Span a, const Mat& w) {
    check_shape(static_cast<int>(a.size()) == w.rows, "ascend: action size mismatch");
    Vec lifted = numkit::vecmat(a, w);
    Vec out(a.begin(), a.end());
    out.insert(out.end(), lifted.begin(), lifted.end());
    return out;
}

struct FlowConfig {
    int action_dim = 1;
    int context_dim = 0;
    int width = 0;  // 0 -> 2*action_dim + 1
    int num_layers = 3;
    std::vector<int> cond_hidden{64};
    std::vector<int> head_hidden{64};
    numkit::Activation activation = numkit::Activation::Tanh;
    bool zero_init_output = true;  // conditioners and head start as zero maps
    bool train_ascend = true;
    bool zero_ascend = false;  // start W at zero (pure zero padding)
    std::uint64_t seed = 1;
};

/// Conditional invertible model: ascend, then num_layers blocks of
/// (fixed permutation, affine coupling), then a scalar prediction head.
/// The flow body is exactly invertible given the context.
struct ParaCFlowModel {
    int action_dim = 0;
    int context_dim = 0;
    int width = 0;
    int split = 0;  // d′ = max(action_dim, width/2), shared by every layer
    bool train_ascend = true;
    std::uint64_t seed = 0;

    Mat ascend_w;  // action_dim x (width - action_dim)
    std::vector<Permutation> perms;
    std::vector<CouplingLayer> layers;
    MlpNet head;  // width -> 1

    int num_layers() const { return static_cast<int>(layers.size()); }

    long param_count() const {
        long n = ascend_w.data.size();
        for (const auto& l : layers) n += l.sigma_net.param_count() + l.t_net.param_count();
        n += head.param_count();
        return n;
    }
};

inline ParaCFlowModel make_paracflow(const FlowConfig& cfg) {
    check_shape(cfg.action_dim >= 1, "make_paracflow: action_dim must be >= 1");
    ParaCFlowModel m;
    m.action_dim = cfg.action_dim;
    m.context_dim = cfg.context_dim;
    m.width = cfg.width > 0 ? cfg.width : 2 * cfg.action_dim + 1;
    check_shape(m.width > cfg.action_dim, "make_paracflow: width must exceed action_dim");
    m.split = std::max(cfg.action_dim, m.width / 2);
    m.train_ascend = cfg.train_ascend;
    m.seed = cfg.seed;

    Rng rng(Rng::derive(cfg.seed, "paracflow_init"));
    m.ascend_w = Mat(cfg.action_dim, m.width - cfg.action_dim);
    if (!cfg.zero_ascend) {
        const double lim = std::sqrt(6.0 / (m.ascend_w.rows + m.ascend_w.cols));
        for (double& x : m.ascend_w.data) x = rng.uniform(-lim, lim);
    }

    const auto init = cfg.zero_init_output ? numkit::InitMode::ZeroOutputLayer
                                           : numkit::InitMode::GlorotUniform;
    for (int i = 0; i < cfg.num_layers; ++i) {
        m.perms.push_back(Permutation::random(m.width, rng));
        m.layers.push_back(make_coupling(m.width, m.split, cfg.context_dim, cfg.cond_hidden,
                                         cfg.activation, rng, init));
    }

    std::vector<int> head_dims{m.width};
    head_dims.insert(head_dims.end(), cfg.head_hidden.begin(), cfg.head_hidden.end());
    head_dims.push_back(1);
    m.head = numkit::make_mlp(head_dims, cfg.activation, rng, init);
    return m;
}

/// Flow body on the working width (permutations + couplings, no ascend/head).
inline Vec flow_forward(const ParaCFlowModel& m, Span c, Span x) {
    Vec u(x.begin(), x.end());
    for (int i = 0; i < m.num_layers(); ++i) {
        u = m.perms[i].apply(u);
        u = coupling_forward(m.layers[i], c, u);
    }
    return u;
}

inline Vec flow_inverse(const ParaCFlowModel& m, Span c, Span y) {
    Vec u(y.begin(), y.end());
    for (int i = m.num_layers() - 1; i >= 0; --i) {
        u = coupling_inverse(m.layers[i], c, u);
        u = m.perms[i].invert(u);
    }
    return u;
}

/// ã = (φ_N P_N) ∘ ... ∘ (φ_1 P_1) ∘ ascend(a).
inline Vec paracflow_features(const ParaCFlowModel& m, Span c, Span a) {
    check_shape(static_cast<int>(c.size()) == m.context_dim,
                "paracflow_features: context size mismatch");
    return flow_forward(m, c, ascend(a, m.ascend_w));
}

inline double paracflow_predict(const ParaCFlowModel& m, Span c, Span a) {
    const Vec f = paracflow_features(m, c, a);
    const Vec out = numkit::mlp_forward(m.head, f);
    if (!std::isfinite(out[0])) throw NumericError("paracflow_predict: non-finite output");
    return out[0];
}

// ---------------------------------------------------------------------------
// Training support: taped forward plus reverse pass through the whole stack.
// ---------------------------------------------------------------------------

struct ModelTape {
    Vec a;                               // raw action input
    Vec lifted;                          // ascend output
    std::vector<Vec> perm_out;           // inputs to each coupling layer
    std::vector<CouplingTape> couplings; // one per layer
    GradTape head_tape;
    Vec features;
    bool recorded = false;
};

inline Vec paracflow_features(const ParaCFlowModel& m, Span c, Span a, ModelTape& tape) {
    tape.a.assign(a.begin(), a.end());
    tape.lifted = ascend(a, m.ascend_w);
    tape.perm_out.resize(m.num_layers());
    tape.couplings.resize(m.num_layers());
    Vec u = tape.lifted;
    for (int i = 0; i < m.num_layers(); ++i) {
        tape.perm_out[i] = m.perms[i].apply(u);
        u = coupling_forward(m.layers[i], c, tape.perm_out[i], tape.couplings[i]);
    }
    tape.features = u;
    tape.recorded = true;
    return u;
}

inline double paracflow_predict(const ParaCFlowModel& m, Span c, Span a, ModelTape& tape) {
    const Vec f = paracflow_features(m, c, a, tape);
    return numkit::mlp_forward(m.head, f, tape.head_tape)[0];
}

struct ModelGrads {
    Mat ascend_w;
    std::vector<CouplingGrads> layers;
    MlpGrads head;

    static ModelGrads zeros_like(const ParaCFlowModel& m) {
        ModelGrads g;
        g.ascend_w = Mat(m.ascend_w.rows, m.ascend_w.cols);
        for (const auto& l : m.layers) g.layers.push_back(CouplingGrads::zeros_like(l));
        g.head = MlpGrads::zeros_like(m.head);
        return g;
    }

    void clear() {
        std::fill(ascend_w.data.begin(), ascend_w.data.end(), 0.0);
        for (auto& l : layers) l.clear();
        head.clear();
    }
};

/// Reverse pass from an adjoint on the feature vector down to the action.
/// Accumulates parameter gradients; optionally reports dL/da.
inline void model_backward_features(const ParaCFlowModel& m, const ModelTape& tape, Span dfeat,
                                    ModelGrads& acc, Vec* action_adjoint = nullptr) {
    if (!tape.recorded) throw StateError("model_backward: no recorded forward pass");
    Vec dy(dfeat.begin(), dfeat.end());
    Vec dx;
    for (int i = m.num_layers() - 1; i >= 0; --i) {
        coupling_backward(m.layers[i], tape.couplings[i], dy, acc.layers[i], dx);
        dy.assign(m.width, 0.0);
        m.perms[i].apply_adjoint(dx, dy);
    }
    // ascend: out = (a, aW)
    const int da = m.action_dim;
    Span d_tail(dy.data() + da, static_cast<std::size_t>(m.width - da));
    numkit::outer_acc(acc.ascend_w, tape.a, d_tail);
    if (action_adjoint) {
        Vec grad_a = numkit::matvec(m.ascend_w, d_tail);
        for (int i = 0; i < da; ++i) grad_a[i] += dy[i];
        *action_adjoint = std::move(grad_a);
    }
}

/// Reverse pass from a scalar prediction adjoint (through the head).
inline void model_backward_predict(const ParaCFlowModel& m, const ModelTape& tape, double dpred,
                                   ModelGrads& acc, Vec* action_adjoint = nullptr) {
    const Vec adj{dpred};
    Vec dfeat;
    numkit::mlp_grad_accum(m.head, tape.head_tape, adj, acc.head, dfeat);
    model_backward_features(m, tape, dfeat, acc, action_adjoint);
}

/// Trainable parameter views in a fixed enumeration order (ascend W when
/// trainable, then per-layer conditioners, then head). Gradients enumerate
/// identically so the two lists stay aligned for the optimizer.
inline std::vector<numkit::ParamView> trainable_params(ParaCFlowModel& m,
                                                       bool include_head = true) {
    std::vector<numkit::ParamView> out;
    if (m.train_ascend && !m.ascend_w.data.empty())
        out.push_back({m.ascend_w.data.data(), m.ascend_w.data.size()});
    for (auto& l : m.layers) {
        numkit::collect_params(l.sigma_net, out);
        numkit::collect_params(l.t_net, out);
    }
    if (include_head) numkit::collect_params(m.head, out);
    return out;
}

inline std::vector<numkit::ParamView> gradient_views(const ParaCFlowModel& m, ModelGrads& g,
                                                     bool include_head = true) {
    std::vector<numkit::ParamView> out;
    if (m.train_ascend && !g.ascend_w.data.empty())
        out.push_back({g.ascend_w.data.data(), g.ascend_w.data.size()});
    for (auto& l : g.layers) {
        numkit::collect_params(l.sigma, out);
        numkit::collect_params(l.t, out);
    }
    if (include_head) numkit::collect_params(g.head, out);
    return out;
}

}  // namespace paracflow::flows

#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "paracflow/core/common.hpp"
#include "paracflow/core/rng.hpp"
#include "paracflow/numkit/mat.hpp"

namespace paracflow::numkit {

enum class Activation { Tanh, Relu };

inline double activate(Activation a, double z) {
    return a == Activation::Tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

inline double activate_deriv(Activation a, double z, double post) {
    return a == Activation::Tanh ? 1.0 - post * post : (z > 0.0 ? 1.0 : 0.0);
}

/// Feed-forward network: hidden layers use `activation`, the output layer is
/// linear. `dims` runs input, hidden..., output; zero hidden layers gives a
/// plain affine map.
struct MlpNet {
    std::vector<int> dims;
    std::vector<Mat> weights;  // weights[l]: dims[l+1] x dims[l]
    std::vector<Vec> biases;   // biases[l]: dims[l+1]
    Activation activation = Activation::Tanh;

    int input_dim() const { return dims.front(); }
    int output_dim() const { return dims.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }

    long param_count() const {
        long n = 0;
        for (std::size_t i = 0; i + 1 < dims.size(); ++i)
            n += static_cast<long>(dims[i] + 1) * dims[i + 1];
        return n;
    }
};

enum class InitMode {
    GlorotUniform,   // uniform in ±sqrt(6/(fan_in+fan_out)), all layers
    ZeroOutputLayer, // Glorot hidden layers, zero final layer (identity start)
    Zeros,           // all parameters zero
};

inline MlpNet make_mlp(std::vector<int> dims, Activation act, Rng& rng,
                       InitMode mode = InitMode::GlorotUniform) {
    check_shape(dims.size() >= 2, "make_mlp: need at least input and output dims");
    MlpNet net;
    net.dims = std::move(dims);
    net.activation = act;
    const int layers = static_cast<int>(net.dims.size()) - 1;
    for (int l = 0; l < layers; ++l) {
        const int fan_in = net.dims[l], fan_out = net.dims[l + 1];
        Mat w(fan_out, fan_in);
        Vec b(fan_out, 0.0);
        const bool zero = mode == InitMode::Zeros ||
                          (mode == InitMode::ZeroOutputLayer && l == layers - 1);
        if (!zero) {
            const double lim = std::sqrt(6.0 / (fan_in + fan_out));
            for (double& x : w.data) x = rng.uniform(-lim, lim);
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

/// Forward-pass record: inputs and pre/post-activation values per layer.
/// Owning one of these is what makes a backward pass legal.
struct GradTape {
    std::vector<Vec> post;  // post[0] = x, post[l+1] = layer-l output after activation
    std::vector<Vec> pre;   // pre[l]  = W_l post[l] + b_l
    bool recorded = false;
};

namespace detail {
inline Vec affine(const Mat& w, const Vec& b, Span x) {
    Vec z = matvec(w, x);
    for (int i = 0; i < w.rows; ++i) z[i] += b[i];
    return z;
}
}  // namespace detail

inline Vec mlp_forward(const MlpNet& net, Span x) {
    check_shape(static_cast<int>(x.size()) == net.input_dim(), "mlp_forward: input size mismatch");
    Vec h(x.begin(), x.end());
    const int layers = net.num_layers();
    for (int l = 0; l < layers; ++l) {
        Vec z = detail::affine(net.weights[l], net.biases[l], h);
        if (l + 1 < layers)
            for (double& v : z) v = activate(net.activation, v);
        h = std::move(z);
    }
    return h;
}

inline Vec mlp_forward(const MlpNet& net, Span x, GradTape& tape) {
    check_shape(static_cast<int>(x.size()) == net.input_dim(), "mlp_forward: input size mismatch");
    const int layers = net.num_layers();
    tape.post.assign(1, Vec(x.begin(), x.end()));
    tape.pre.clear();
    for (int l = 0; l < layers; ++l) {
        Vec z = detail::affine(net.weights[l], net.biases[l], tape.post.back());
        tape.pre.push_back(z);
        if (l + 1 < layers)
            for (double& v : z) v = activate(net.activation, v);
        tape.post.push_back(std::move(z));
    }
    tape.recorded = true;
    return tape.post.back();
}

/// Parameter gradients of an MlpNet, accumulated across calls.
struct MlpGrads {
    std::vector<Mat> w;
    std::vector<Vec> b;

    static MlpGrads zeros_like(const MlpNet& net) {
        MlpGrads g;
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            g.w.emplace_back(net.weights[l].rows, net.weights[l].cols);
            g.b.emplace_back(net.biases[l].size(), 0.0);
        }
        return g;
    }

    void clear() {
        for (auto& m : w) std::fill(m.data.begin(), m.data.end(), 0.0);
        for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
    }
};

/// Reverse pass: accumulates parameter gradients into `acc` and writes the
/// adjoint w.r.t. the network input into `input_adjoint`.
inline void mlp_grad_accum(const MlpNet& net, const GradTape& tape, Span loss_adjoint,
                           MlpGrads& acc, Vec& input_adjoint) {
    if (!tape.recorded) throw StateError("mlp_grad: backward called before forward");
    check_shape(static_cast<int>(loss_adjoint.size()) == net.output_dim(),
                "mlp_grad: adjoint size mismatch");
    const int layers = net.num_layers();
    Vec delta(loss_adjoint.begin(), loss_adjoint.end());
    for (int l = layers - 1; l >= 0; --l) {
        outer_acc(acc.w[l], delta, tape.post[l]);
        axpy(1.0, delta, acc.b[l]);
        Vec prev(net.dims[l], 0.0);
        matvec_t_acc(net.weights[l], delta, prev);
        if (l > 0) {
            const Vec& z = tape.pre[l - 1];
            const Vec& post = tape.post[l];
            for (std::size_t i = 0; i < prev.size(); ++i)
                prev[i] *= activate_deriv(net.activation, z[i], post[i]);
        }
        delta = std::move(prev);
    }
    input_adjoint = std::move(delta);
}

/// One-shot convenience wrapper; returns fresh gradients plus input adjoint.
struct MlpGradResult {
    MlpGrads grads;
    Vec input_adjoint;
};

inline MlpGradResult mlp_grad(const MlpNet& net, const GradTape& tape, Span loss_adjoint) {
    MlpGradResult r{MlpGrads::zeros_like(net), {}};
    mlp_grad_accum(net, tape, loss_adjoint, r.grads, r.input_adjoint);
    for (std::size_t l = 0; l < r.grads.w.size(); ++l) {
        require_finite(r.grads.w[l].data, "mlp_grad weights");
        require_finite(r.grads.b[l], "mlp_grad biases");
    }
    return r;
}

}  // namespace paracflow::numkit

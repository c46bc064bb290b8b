#pragma once

#include <algorithm>
#include <cmath>

#include "paracflow/core/common.hpp"
#include "paracflow/core/rng.hpp"
#include "paracflow/numkit/mlp.hpp"

namespace paracflow::flows {

using numkit::GradTape;
using numkit::MlpGrads;
using numkit::MlpNet;

/// Log-scale outputs are clamped to ±kSigmaClamp before exponentiation so a
/// wild conditioner cannot overflow exp().
inline constexpr double kSigmaClamp = 8.0;

/// Fixed permutation of coordinates; y[i] = x[map[i]].
struct Permutation {
    std::vector<int> map;

    int dim() const { return static_cast<int>(map.size()); }

    Vec apply(Span x) const {
        check_shape(x.size() == map.size(), "permutation: size mismatch");
        Vec y(x.size());
        for (std::size_t i = 0; i < map.size(); ++i) y[i] = x[map[i]];
        return y;
    }

    Vec invert(Span y) const {
        check_shape(y.size() == map.size(), "permutation: size mismatch");
        Vec x(y.size());
        for (std::size_t i = 0; i < map.size(); ++i) x[map[i]] = y[i];
        return x;
    }

    /// dx[map[i]] += dy[i] — adjoint of apply().
    void apply_adjoint(Span dy, MutSpan dx) const {
        for (std::size_t i = 0; i < map.size(); ++i) dx[map[i]] += dy[i];
    }

    bool is_bijection() const {
        std::vector<bool> seen(map.size(), false);
        for (int i : map) {
            if (i < 0 || i >= dim() || seen[i]) return false;
            seen[i] = true;
        }
        return true;
    }

    static Permutation identity(int d) {
        Permutation p;
        p.map.resize(d);
        for (int i = 0; i < d; ++i) p.map[i] = i;
        return p;
    }

    static Permutation random(int d, Rng& rng) {
        Permutation p = identity(d);
        for (int i = d - 1; i > 0; --i)
            std::swap(p.map[i], p.map[rng.uniform_int(i + 1)]);
        return p;
    }
};

/// Affine coupling layer on R^dim conditioned on a context vector:
/// passes coordinates [0, split) through unchanged and maps the rest to
/// x ⊙ exp(σ(ctx, x_pass)) + t(ctx, x_pass).
struct CouplingLayer {
    int dim = 0;       // d
    int split = 0;     // d′, 1 ≤ d′ < d
    int cond_dim = 0;  // m, 0 for non-parametric layers

    MlpNet sigma_net;  // (m + d′) -> (d − d′)
    MlpNet t_net;      // (m + d′) -> (d − d′)

    void validate() const {
        check_shape(split >= 1 && split < dim, "coupling: need 1 <= split < dim");
        check_shape(sigma_net.input_dim() == cond_dim + split &&
                        sigma_net.output_dim() == dim - split,
                    "coupling: sigma net shape mismatch");
        check_shape(t_net.input_dim() == cond_dim + split && t_net.output_dim() == dim - split,
                    "coupling: t net shape mismatch");
    }
};

inline CouplingLayer make_coupling(int dim, int split, int cond_dim,
                                   const std::vector<int>& hidden, numkit::Activation act,
                                   Rng& rng, numkit::InitMode mode) {
    CouplingLayer layer;
    layer.dim = dim;
    layer.split = split;
    layer.cond_dim = cond_dim;
    std::vector<int> dims{cond_dim + split};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(dim - split);
    layer.sigma_net = numkit::make_mlp(dims, act, rng, mode);
    layer.t_net = numkit::make_mlp(dims, act, rng, mode);
    layer.validate();
    return layer;
}

/// Forward/backward record for one coupling layer.
struct CouplingTape {
    GradTape sigma_tape, t_tape;
    Vec s_raw, s, exp_s;
    Vec x;
    bool recorded = false;
};

namespace detail {
inline void conditioner_eval(const CouplingLayer& layer, Span c, Span x, Vec& s_raw, Vec& s,
                             Vec& exp_s, Vec& t, GradTape* sig_tape = nullptr,
                             GradTape* t_tape = nullptr) {
    const Vec in = concat(c, x.subspan(0, layer.split));
    s_raw = sig_tape ? numkit::mlp_forward(layer.sigma_net, in, *sig_tape)
                     : numkit::mlp_forward(layer.sigma_net, in);
    t = t_tape ? numkit::mlp_forward(layer.t_net, in, *t_tape)
               : numkit::mlp_forward(layer.t_net, in);
    if (!all_finite(s_raw) || !all_finite(t))
        throw NumericError("coupling: conditioner produced non-finite output");
    s.resize(s_raw.size());
    exp_s.resize(s_raw.size());
    for (std::size_t k = 0; k < s_raw.size(); ++k) {
        s[k] = std::clamp(s_raw[k], -kSigmaClamp, kSigmaClamp);
        exp_s[k] = std::exp(s[k]);
    }
}
}  // namespace detail

inline Vec coupling_forward(const CouplingLayer& layer, Span c, Span x) {
    check_shape(static_cast<int>(x.size()) == layer.dim, "coupling_forward: x size mismatch");
    check_shape(static_cast<int>(c.size()) == layer.cond_dim, "coupling_forward: c size mismatch");
    Vec s_raw, s, exp_s, t;
    detail::conditioner_eval(layer, c, x, s_raw, s, exp_s, t);
    Vec y(x.begin(), x.end());
    for (int k = 0; k < layer.dim - layer.split; ++k)
        y[layer.split + k] = x[layer.split + k] * exp_s[k] + t[k];
    return y;
}

inline Vec coupling_forward(const CouplingLayer& layer, Span c, Span x, CouplingTape& tape) {
    check_shape(static_cast<int>(x.size()) == layer.dim, "coupling_forward: x size mismatch");
    Vec t;
    detail::conditioner_eval(layer, c, x, tape.s_raw, tape.s, tape.exp_s, t, &tape.sigma_tape,
                             &tape.t_tape);
    tape.x.assign(x.begin(), x.end());
    Vec y(x.begin(), x.end());
    for (int k = 0; k < layer.dim - layer.split; ++k)
        y[layer.split + k] = x[layer.split + k] * tape.exp_s[k] + t[k];
    tape.recorded = true;
    return y;
}

/// Exact analytic inverse: x = (y − t) ⊙ exp(−σ) on the transformed block.
inline Vec coupling_inverse(const CouplingLayer& layer, Span c, Span y) {
    check_shape(static_cast<int>(y.size()) == layer.dim, "coupling_inverse: y size mismatch");
    check_shape(static_cast<int>(c.size()) == layer.cond_dim, "coupling_inverse: c size mismatch");
    Vec s_raw, s, exp_s, t;
    detail::conditioner_eval(layer, c, y, s_raw, s, exp_s, t);
    Vec x(y.begin(), y.end());
    for (int k = 0; k < layer.dim - layer.split; ++k)
        x[layer.split + k] = (y[layer.split + k] - t[k]) / exp_s[k];
    return x;
}

/// log|det ∂y/∂x| = Σ σ(c, x_pass) over the transformed block.
inline double coupling_log_det(const CouplingLayer& layer, Span c, Span x) {
    Vec s_raw, s, exp_s, t;
    detail::conditioner_eval(layer, c, x, s_raw, s, exp_s, t);
    double sum = 0.0;
    for (double v : s) sum += v;
    return sum;
}

struct CouplingGrads {
    MlpGrads sigma, t;

    static CouplingGrads zeros_like(const CouplingLayer& layer) {
        return {MlpGrads::zeros_like(layer.sigma_net), MlpGrads::zeros_like(layer.t_net)};
    }

    void clear() {
        sigma.clear();
        t.clear();
    }
};

/// Reverse pass through a coupling layer: accumulates conditioner parameter
/// gradients and writes the adjoint w.r.t. the layer input into dx.
/// Clamped σ components propagate zero gradient, matching the forward clamp.
inline void coupling_backward(const CouplingLayer& layer, const CouplingTape& tape, Span dy,
                              CouplingGrads& acc, Vec& dx) {
    if (!tape.recorded) throw StateError("coupling_backward: no recorded forward pass");
    const int nt = layer.dim - layer.split;
    Vec d_s(nt), d_t(nt);
    for (int k = 0; k < nt; ++k) {
        const double g = dy[layer.split + k];
        d_t[k] = g;
        const bool clamped = std::abs(tape.s_raw[k]) > kSigmaClamp;
        d_s[k] = clamped ? 0.0 : g * tape.x[layer.split + k] * tape.exp_s[k];
    }
    Vec in_adj_sigma, in_adj_t;
    numkit::mlp_grad_accum(layer.sigma_net, tape.sigma_tape, d_s, acc.sigma, in_adj_sigma);
    numkit::mlp_grad_accum(layer.t_net, tape.t_tape, d_t, acc.t, in_adj_t);

    dx.assign(layer.dim, 0.0);
    for (int i = 0; i < layer.split; ++i)
        dx[i] = dy[i] + in_adj_sigma[layer.cond_dim + i] + in_adj_t[layer.cond_dim + i];
    for (int k = 0; k < nt; ++k) dx[layer.split + k] = dy[layer.split + k] * tape.exp_s[k];
}

}  // namespace paracflow::flows

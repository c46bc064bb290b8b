#pragma once

#include <span>

#include "paracflow/flows/train.hpp"
#include "paracflow/numkit/adam.hpp"

namespace paracflow::cbo {

using numkit::Activation;
using numkit::Mat;
using numkit::MlpGrads;
using numkit::MlpNet;
using numkit::ParamView;

struct RegressorSample {
    Vec input;
    Vec target;
};

/// Shared minibatch-Adam fit loop. A regressor provides a Tape, taped
/// forward, gradient accumulation, and parameter/gradient views.
template <class M>
std::vector<double> fit_regressor(M& m, std::span<const RegressorSample> data,
                                  const flows::TrainConfig& cfg) {
    check_shape(!data.empty(), "fit_regressor: empty dataset");
    auto params = m.param_views();
    auto grad_views = m.grad_views();
    numkit::AdamState adam(params);
    Rng rng(Rng::derive(cfg.seed, "fit_regressor"));

    std::vector<double> trace;
    typename M::Tape tape;
    double lr = cfg.lr;
    const int out_dim = m.output_dim();
    Vec adjoint(out_dim, 0.0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto idx = flows::detail::shuffled_indices(data.size(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < idx.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(idx.size(), start + cfg.batch_size);
            const double inv_n = 1.0 / static_cast<double>(stop - start);
            m.clear_grads();
            for (std::size_t k = start; k < stop; ++k) {
                const auto& s = data[idx[k]];
                const Vec out = m.forward(s.input, tape);
                for (int i = 0; i < out_dim; ++i) {
                    const double r = out[i] - s.target[i];
                    epoch_loss += r * r;
                    adjoint[i] = 2.0 * r * inv_n;
                }
                m.backward(tape, adjoint);
            }
            adam.step(params, grad_views, lr);
        }
        trace.push_back(epoch_loss / static_cast<double>(data.size()));
        lr *= cfg.lr_decay;
    }
    return trace;
}

/// Plain feed-forward regressor on a concatenated input vector.
class MlpRegressor {
public:
    using Tape = numkit::GradTape;

    MlpRegressor() = default;
    MlpRegressor(std::vector<int> dims, Activation act, std::uint64_t seed) {
        Rng rng(Rng::derive(seed, "mlp_regressor"));
        net_ = numkit::make_mlp(std::move(dims), act, rng);
        grads_ = MlpGrads::zeros_like(net_);
    }

    int input_dim() const { return net_.input_dim(); }
    int output_dim() const { return net_.output_dim(); }
    long param_count() const { return net_.param_count(); }
    const MlpNet& net() const { return net_; }
    MlpNet& net() { return net_; }

    Vec forward(Span u) const { return numkit::mlp_forward(net_, u); }
    Vec forward(Span u, Tape& tape) const { return numkit::mlp_forward(net_, u, tape); }

    void backward(const Tape& tape, Span adjoint) {
        Vec input_adj;
        numkit::mlp_grad_accum(net_, tape, adjoint, grads_, input_adj);
    }

    void clear_grads() { grads_.clear(); }

    std::vector<ParamView> param_views() {
        std::vector<ParamView> v;
        numkit::collect_params(net_, v);
        return v;
    }

    std::vector<ParamView> grad_views() {
        std::vector<ParamView> v;
        numkit::collect_params(grads_, v);
        return v;
    }

private:
    MlpNet net_;
    MlpGrads grads_;
};

/// Residual-style regressor: the trailing `append_dim` coordinates of the
/// input are appended to every hidden layer's output before the next affine
/// map, so the action keeps a direct path to the output regardless of depth.
class ResnetRegressor {
public:
    ResnetRegressor() = default;
    ResnetRegressor(int input_dim, int append_dim, std::vector<int> hidden, int output_dim,
                    Activation act, std::uint64_t seed)
        : in_dim_(input_dim), append_dim_(append_dim), out_dim_(output_dim), act_(act) {
        check_shape(append_dim >= 1 && append_dim < input_dim,
                    "resnet: append block must be a proper suffix of the input");
        check_shape(!hidden.empty(), "resnet: need at least one hidden layer");
        Rng rng(Rng::derive(seed, "resnet_regressor"));
        int prev = input_dim;
        for (int h : hidden) {
            push_layer(h, prev, rng);
            prev = h + append_dim;
        }
        push_layer(output_dim, prev, rng);
        for (const auto& wm : w_) {
            gw_.emplace_back(wm.rows, wm.cols);
            gb_.emplace_back(wm.rows, 0.0);
        }
    }

    int input_dim() const { return in_dim_; }
    int output_dim() const { return out_dim_; }

    long param_count() const {
        long n = 0;
        for (std::size_t l = 0; l < w_.size(); ++l)
            n += static_cast<long>(w_[l].data.size()) + static_cast<long>(b_[l].size());
        return n;
    }

    struct Tape {
        std::vector<Vec> in;   // input to each affine map (with append)
        std::vector<Vec> pre;  // pre-activation
        bool recorded = false;
    };

    Vec forward(Span u) const {
        Tape tape;
        return forward(u, tape);
    }

    Vec forward(Span u, Tape& tape) const {
        check_shape(static_cast<int>(u.size()) == in_dim_, "resnet: input size mismatch");
        const Span app = u.subspan(u.size() - append_dim_);
        tape.in.assign(1, Vec(u.begin(), u.end()));
        tape.pre.clear();
        const int layers = static_cast<int>(w_.size());
        for (int l = 0; l < layers; ++l) {
            Vec z = numkit::matvec(w_[l], tape.in.back());
            for (int i = 0; i < w_[l].rows; ++i) z[i] += b_[l][i];
            tape.pre.push_back(z);
            if (l + 1 < layers) {
                for (double& v : z) v = numkit::activate(act_, v);
                z.insert(z.end(), app.begin(), app.end());
                tape.in.push_back(std::move(z));
            } else {
                tape.recorded = true;
                return z;
            }
        }
        return tape.pre.back();
    }

    void backward(const Tape& tape, Span adjoint) {
        const int layers = static_cast<int>(w_.size());
        Vec delta(adjoint.begin(), adjoint.end());
        for (int l = layers - 1; l >= 0; --l) {
            numkit::outer_acc(gw_[l], delta, tape.in[l]);
            numkit::axpy(1.0, delta, gb_[l]);
            if (l == 0) break;
            Vec prev(w_[l].cols, 0.0);
            numkit::matvec_t_acc(w_[l], delta, prev);
            // Drop the appended block's adjoint; it feeds the raw input only.
            const int width = w_[l - 1].rows;
            Vec next(width, 0.0);
            for (int i = 0; i < width; ++i)
                next[i] = prev[i] *
                          numkit::activate_deriv(act_, tape.pre[l - 1][i], tape.in[l][i]);
            delta = std::move(next);
        }
    }

    void clear_grads() {
        for (auto& m : gw_) std::fill(m.data.begin(), m.data.end(), 0.0);
        for (auto& v : gb_) std::fill(v.begin(), v.end(), 0.0);
    }

    std::vector<ParamView> param_views() { return views(w_, b_); }
    std::vector<ParamView> grad_views() { return views(gw_, gb_); }

    std::vector<Mat>& weights() { return w_; }
    std::vector<Vec>& biases() { return b_; }

private:
    void push_layer(int rows, int cols, Rng& rng) {
        Mat w(rows, cols);
        const double lim = std::sqrt(6.0 / (rows + cols));
        for (double& x : w.data) x = rng.uniform(-lim, lim);
        w_.push_back(std::move(w));
        b_.emplace_back(rows, 0.0);
    }

    static std::vector<ParamView> views(std::vector<Mat>& ws, std::vector<Vec>& bs) {
        std::vector<ParamView> v;
        for (std::size_t l = 0; l < ws.size(); ++l) {
            v.push_back({ws[l].data.data(), ws[l].data.size()});
            v.push_back({bs[l].data(), bs[l].size()});
        }
        return v;
    }

    int in_dim_ = 0, append_dim_ = 0, out_dim_ = 0;
    Activation act_ = Activation::Tanh;
    std::vector<Mat> w_;
    std::vector<Vec> b_;
    std::vector<Mat> gw_;
    std::vector<Vec> gb_;
};

/// MLP over linearly lifted inputs: context and action are each raised to
/// dimension max(5, d_c) by an affine map, concatenated, and fed to an MLP.
class MlpAscendRegressor {
public:
    MlpAscendRegressor() = default;
    MlpAscendRegressor(int d_c, int d_a, std::vector<int> hidden, int output_dim, Activation act,
                       std::uint64_t seed)
        : d_c_(d_c), d_a_(d_a), lift_(std::max(5, d_c)) {
        Rng rng(Rng::derive(seed, "mlp_ascend_regressor"));
        lift_c_ = init_mat(lift_, d_c, rng);
        lift_a_ = init_mat(lift_, d_a, rng);
        lift_c_b_.assign(lift_, 0.0);
        lift_a_b_.assign(lift_, 0.0);
        std::vector<int> dims{2 * lift_};
        dims.insert(dims.end(), hidden.begin(), hidden.end());
        dims.push_back(output_dim);
        net_ = numkit::make_mlp(std::move(dims), act, rng);
        g_lift_c_ = Mat(lift_, d_c);
        g_lift_a_ = Mat(lift_, d_a);
        g_lift_c_b_.assign(lift_, 0.0);
        g_lift_a_b_.assign(lift_, 0.0);
        g_net_ = MlpGrads::zeros_like(net_);
    }

    int input_dim() const { return d_c_ + d_a_; }
    int output_dim() const { return net_.output_dim(); }

    long param_count() const {
        return static_cast<long>(lift_c_.data.size() + lift_a_.data.size() + lift_c_b_.size() +
                                 lift_a_b_.size()) +
               net_.param_count();
    }

    struct Tape {
        Vec c, a, lifted;
        numkit::GradTape net_tape;
    };

    Vec forward(Span u) const {
        Tape tape;
        return forward(u, tape);
    }

    Vec forward(Span u, Tape& tape) const {
        check_shape(static_cast<int>(u.size()) == d_c_ + d_a_, "mlp_ascend: input size mismatch");
        tape.c.assign(u.begin(), u.begin() + d_c_);
        tape.a.assign(u.begin() + d_c_, u.end());
        Vec lc = numkit::matvec(lift_c_, tape.c);
        Vec la = numkit::matvec(lift_a_, tape.a);
        for (int i = 0; i < lift_; ++i) {
            lc[i] += lift_c_b_[i];
            la[i] += lift_a_b_[i];
        }
        tape.lifted = concat(lc, la);
        return numkit::mlp_forward(net_, tape.lifted, tape.net_tape);
    }

    void backward(const Tape& tape, Span adjoint) {
        Vec dl;
        numkit::mlp_grad_accum(net_, tape.net_tape, adjoint, g_net_, dl);
        const Span dlc(dl.data(), static_cast<std::size_t>(lift_));
        const Span dla(dl.data() + lift_, static_cast<std::size_t>(lift_));
        numkit::outer_acc(g_lift_c_, dlc, tape.c);
        numkit::outer_acc(g_lift_a_, dla, tape.a);
        numkit::axpy(1.0, dlc, g_lift_c_b_);
        numkit::axpy(1.0, dla, g_lift_a_b_);
    }

    void clear_grads() {
        std::fill(g_lift_c_.data.begin(), g_lift_c_.data.end(), 0.0);
        std::fill(g_lift_a_.data.begin(), g_lift_a_.data.end(), 0.0);
        std::fill(g_lift_c_b_.begin(), g_lift_c_b_.end(), 0.0);
        std::fill(g_lift_a_b_.begin(), g_lift_a_b_.end(), 0.0);
        g_net_.clear();
    }

    std::vector<ParamView> param_views() {
        std::vector<ParamView> v{{lift_c_.data.data(), lift_c_.data.size()},
                                 {lift_c_b_.data(), lift_c_b_.size()},
                                 {lift_a_.data.data(), lift_a_.data.size()},
                                 {lift_a_b_.data(), lift_a_b_.size()}};
        numkit::collect_params(net_, v);
        return v;
    }

    std::vector<ParamView> grad_views() {
        std::vector<ParamView> v{{g_lift_c_.data.data(), g_lift_c_.data.size()},
                                 {g_lift_c_b_.data(), g_lift_c_b_.size()},
                                 {g_lift_a_.data.data(), g_lift_a_.data.size()},
                                 {g_lift_a_b_.data(), g_lift_a_b_.size()}};
        numkit::collect_params(g_net_, v);
        return v;
    }

private:
    static Mat init_mat(int rows, int cols, Rng& rng) {
        Mat m(rows, cols);
        const double lim = std::sqrt(6.0 / (rows + cols));
        for (double& x : m.data) x = rng.uniform(-lim, lim);
        return m;
    }

    int d_c_ = 0, d_a_ = 0, lift_ = 0;
    Mat lift_c_, lift_a_;
    Vec lift_c_b_, lift_a_b_;
    MlpNet net_;

    Mat g_lift_c_, g_lift_a_;
    Vec g_lift_c_b_, g_lift_a_b_;
    MlpGrads g_net_;
};

}  // namespace paracflow::cbo

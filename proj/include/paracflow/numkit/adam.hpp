#pragma once

#include <cstddef>
#include <vector>

#include "paracflow/core/common.hpp"
#include "paracflow/numkit/mlp.hpp"

namespace paracflow::numkit {

/// Flat view over one parameter tensor's storage.
struct ParamView {
    double* data = nullptr;
    std::size_t size = 0;
};

inline void collect_params(MlpNet& net, std::vector<ParamView>& out) {
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        out.push_back({net.weights[l].data.data(), net.weights[l].data.size()});
        out.push_back({net.biases[l].data(), net.biases[l].size()});
    }
}

inline void collect_params(MlpGrads& g, std::vector<ParamView>& out) {
    for (std::size_t l = 0; l < g.w.size(); ++l) {
        out.push_back({g.w[l].data.data(), g.w[l].data.size()});
        out.push_back({g.b[l].data(), g.b[l].size()});
    }
}

/// Adam with bias correction. β₁=0.9, β₂=0.999, ε=1e-8 unless configured.
struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class AdamState {
public:
    AdamState() = default;

    explicit AdamState(const std::vector<ParamView>& params, AdamConfig cfg = {}) : cfg_(cfg) {
        for (const auto& p : params) {
            m_.emplace_back(p.size, 0.0);
            v_.emplace_back(p.size, 0.0);
        }
    }

    long step_count() const { return t_; }

    void step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
              double lr) {
        check_shape(params.size() == m_.size() && grads.size() == m_.size(),
                    "adam_step: parameter list does not match state");
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t k = 0; k < params.size(); ++k) {
            check_shape(params[k].size == m_[k].size() && grads[k].size == m_[k].size(),
                        "adam_step: tensor shape mismatch");
            double* p = params[k].data;
            const double* g = grads[k].data;
            Vec& m = m_[k];
            Vec& v = v_[k];
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (!std::isfinite(g[i])) throw NumericError("adam_step: non-finite gradient");
                m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
                v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                p[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

private:
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<Vec> m_, v_;
};

}  // namespace paracflow::numkit

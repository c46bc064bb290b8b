#pragma once

#include "paracflow/diffeo/factor.hpp"
#include "paracflow/diffeo/root_find.hpp"
#include "paracflow/flows/model.hpp"
#include "paracflow/numkit/adam.hpp"

namespace paracflow::diffeo {

/// The padded realization of a single-coordinate transform as three steps on
/// R^(d+1): write τ_d(x) into the padded slot, swap it with x_d, then erase
/// the stale x_d using the inverse of τ_d. Composing the analytic steps sends
/// (x, 0) to (x_{<d}, τ_d(x), 0) exactly (up to root-finder tolerance).
inline Vec analytic_three_step(const SingleCoordinateFactor& tau, Span x, double root_tol = 1e-13) {
    const int d = tau.dim;
    check_shape(tau.coord == d - 1, "analytic_three_step: factor must alter the last coordinate");
    check_shape(static_cast<int>(x.size()) == d, "analytic_three_step: input size mismatch");

    // Step 1: (x, 0) -> (x, tau(x)) — affine coupling on the padded slot.
    Vec z(x.begin(), x.end());
    z.push_back(tau.tau(x));
    // Step 2: swap coordinates d-1 and d — a permutation layer.
    std::swap(z[d - 1], z[d]);
    // Step 3: additive coupling conditioned on the first d coordinates,
    // shifting the last slot by −τ_d⁻¹(x_{<d-1}, v).
    Vec probe(z.begin(), z.begin() + d);
    auto slice = [&](double t) {
        probe[d - 1] = t;
        return tau.tau(probe);
    };
    const double lo = tau.support_lo[d - 1] - 1.0;
    const double hi = tau.support_hi[d - 1] + 1.0;
    const double inv = invert_monotone(slice, z[d - 1], z[d], std::min(lo, z[d] - 1.0),
                                       std::max(hi, z[d] + 1.0), root_tol);
    z[d] -= inv;
    return z;
}

struct SingleCoordApproxConfig {
    std::vector<int> hidden{64};
    int iters = 30000;    // full-batch Adam iterations per conditioner
    double lr = 0.01;
    double lr_floor_frac = 0.01;  // geometric decay down to lr * frac
    double target_eps = 1e-2;
    int inverse_grid_per_axis = 0;  // 0 → reuse the evaluation grid density
    double root_tol = 1e-13;
    std::uint64_t seed = 1;
};

struct SingleCoordApprox {
    flows::CouplingLayer write_layer;  // fills the padded slot with τ̂_d(x)
    flows::Permutation swap;
    flows::CouplingLayer erase_layer;  // subtracts τ̂_d⁻¹ from the stale slot
    double sup_error = 0.0;     // ‖τ − π_d ∘ τ̃ ∘ ι_d‖ on the grid
    double aux_residual = 0.0;  // sup |padded slot| after the third step
    bool reached_target = false;

    /// (x, 0) through the trained stack.
    Vec forward(Span x) const {
        Vec z(x.begin(), x.end());
        z.push_back(0.0);
        const Vec empty_ctx;
        z = flows::coupling_forward(write_layer, empty_ctx, z);
        z = swap.apply(z);
        return flows::coupling_forward(erase_layer, empty_ctx, z);
    }
};

namespace detail {

/// Full-batch Adam regression of a scalar-output net onto (input, target)
/// pairs. Returns max abs error on the pairs.
inline double regress_to_targets(numkit::MlpNet& net, const std::vector<Vec>& inputs,
                                 const Vec& targets, int iters, double lr, double lr_floor_frac) {
    std::vector<numkit::ParamView> params;
    numkit::collect_params(net, params);
    numkit::MlpGrads grads = numkit::MlpGrads::zeros_like(net);
    std::vector<numkit::ParamView> grad_views;
    numkit::collect_params(grads, grad_views);
    numkit::AdamState adam(params);

    const double n_inv = 1.0 / static_cast<double>(inputs.size());
    const double decay = iters > 1 ? std::pow(lr_floor_frac, 1.0 / (iters - 1)) : 1.0;
    numkit::GradTape tape;
    Vec input_adj;
    double cur_lr = lr;
    for (int it = 0; it < iters; ++it) {
        grads.clear();
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            const Vec out = numkit::mlp_forward(net, inputs[k], tape);
            const Vec adj{2.0 * (out[0] - targets[k]) * n_inv};
            numkit::mlp_grad_accum(net, tape, adj, grads, input_adj);
        }
        adam.step(params, grad_views, cur_lr);
        cur_lr *= decay;
    }
    double max_err = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const Vec out = numkit::mlp_forward(net, inputs[k]);
        max_err = std::max(max_err, std::abs(out[0] - targets[k]));
    }
    return max_err;
}

}  // namespace detail

/// Train the padded three-step stack for a single-coordinate transform.
/// The write layer's shift net regresses to τ_d on the grid; the erase
/// layer's shift net regresses to −τ_d⁻¹ tabulated by root finding over the
/// value range. σ-nets stay zero. Failure to reach target_eps is reported in
/// the result rather than thrown.
inline SingleCoordApprox approximate_single_coordinate(const SingleCoordinateFactor& tau,
                                                       const GridSpec& grid,
                                                       const SingleCoordApproxConfig& cfg = {}) {
    grid.validate();
    const int d = tau.dim;
    check_shape(tau.coord == d - 1, "approximate_single_coordinate: factor must alter the last coordinate");
    check_shape(grid.dim() == d, "approximate_single_coordinate: grid dimension mismatch");

    Rng rng(Rng::derive(cfg.seed, "single_coord_approx"));
    SingleCoordApprox out;
    out.write_layer = flows::make_coupling(d + 1, d, 0, cfg.hidden, numkit::Activation::Tanh,
                                           rng, numkit::InitMode::ZeroOutputLayer);
    for (auto& w : out.write_layer.sigma_net.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
    out.erase_layer = flows::make_coupling(d + 1, d, 0, cfg.hidden, numkit::Activation::Tanh,
                                           rng, numkit::InitMode::ZeroOutputLayer);
    for (auto& w : out.erase_layer.sigma_net.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
    out.swap = flows::Permutation::identity(d + 1);
    std::swap(out.swap.map[d - 1], out.swap.map[d]);

    // Write layer: regress the shift net onto τ_d over the grid.
    std::vector<Vec> inputs;
    Vec targets;
    inputs.reserve(grid.total());
    for_each_point(grid, [&](const Vec& x) {
        inputs.push_back(x);
        targets.push_back(tau.tau(x));
    });
    detail::regress_to_targets(out.write_layer.t_net, inputs, targets, cfg.iters, cfg.lr,
                               cfg.lr_floor_frac);

    // Erase layer: tabulate τ_d⁻¹ by root finding on a regular grid over the
    // leading coordinates times the observed value range, regress onto −τ_d⁻¹.
    double v_lo = targets[0], v_hi = targets[0];
    for (double v : targets) {
        v_lo = std::min(v_lo, v);
        v_hi = std::max(v_hi, v);
    }
    GridSpec inv_grid = grid;
    inv_grid.lo[d - 1] = v_lo;
    inv_grid.hi[d - 1] = v_hi;
    if (cfg.inverse_grid_per_axis > 0)
        for (int ax = 0; ax < d; ++ax) inv_grid.points[ax] = cfg.inverse_grid_per_axis;
    const double lo_t = tau.support_lo[d - 1] - 1.0;
    const double hi_t = tau.support_hi[d - 1] + 1.0;
    std::vector<Vec> inv_inputs;
    Vec inv_targets;
    for_each_point(inv_grid, [&](const Vec& xv) {
        Vec probe(xv.begin(), xv.end());
        auto slice = [&](double t) {
            probe[d - 1] = t;
            return tau.tau(probe);
        };
        const double v = xv[d - 1];
        const double inv = invert_monotone(slice, v, v, std::min(lo_t, v - 1.0),
                                           std::max(hi_t, v + 1.0), cfg.root_tol);
        inv_inputs.push_back(xv);
        inv_targets.push_back(-inv);
    });
    detail::regress_to_targets(out.erase_layer.t_net, inv_inputs, inv_targets, cfg.iters, cfg.lr,
                               cfg.lr_floor_frac);

    // End-to-end errors on the grid.
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Vec z = out.forward(inputs[i]);
        out.sup_error = std::max(out.sup_error, std::abs(z[d - 1] - targets[i]));
        out.aux_residual = std::max(out.aux_residual, std::abs(z[d]));
    }
    out.reached_target = out.sup_error <= cfg.target_eps;
    return out;
}

}  // namespace paracflow::diffeo

#pragma once

#include <algorithm>

#include "paracflow/cbo/regressors.hpp"
#include "paracflow/cbo/surrogates.hpp"
#include "paracflow/flows/eliminator.hpp"
#include "paracflow/flows/train.hpp"
#include "paracflow/numkit/fd.hpp"
#include "paracflow/taiji/taiji.hpp"

namespace paracflow::taiji {

/// Conditioner hidden width rule: twice the conditioner input dimension,
/// floored at 8.
inline int cond_hidden_width(int context_dim) { return std::max(8, 2 * (context_dim + 2)); }

struct TaijiTrainConfig {
    int num_layers = 6;
    int batch_size = 64;
    int epochs = 200;
    double lr = 0.01;
    double lr_decay = 1.0;
    std::uint64_t seed = 1;
};

/// Build the padded flow for the twist task: x (2-dim) lifted by a literal
/// zero pad (W frozen at zero), six permutation+coupling blocks of width 3
/// conditioned on the parameter vector, trained on the first two output
/// dimensions.
inline flows::ParaCFlowModel make_taiji_model(int param_dim, const TaijiTrainConfig& cfg) {
    flows::FlowConfig fc;
    fc.action_dim = 2;
    fc.context_dim = param_dim;
    fc.width = 3;
    fc.num_layers = cfg.num_layers;
    fc.cond_hidden = {cond_hidden_width(param_dim)};
    fc.head_hidden = {};
    fc.zero_init_output = true;
    fc.zero_ascend = true;
    fc.train_ascend = false;
    fc.seed = cfg.seed;
    return flows::make_paracflow(fc);
}

inline std::vector<flows::VectorSample> to_vector_samples(const std::vector<TaijiSample>& data) {
    std::vector<flows::VectorSample> out;
    out.reserve(data.size());
    for (const auto& s : data) out.push_back({s.y, s.x, s.target});
    return out;
}

struct TrainedTaiji {
    flows::ParaCFlowModel model;
    std::vector<double> loss_trace;
    double final_loss = 0.0;
};

inline TrainedTaiji train_taiji_flow(const std::vector<TaijiSample>& data,
                                     const TaijiTrainConfig& cfg) {
    check_shape(!data.empty(), "train_taiji_flow: empty dataset");
    const int param_dim = static_cast<int>(data.front().y.size());
    TrainedTaiji out{make_taiji_model(param_dim, cfg), {}, 0.0};
    const auto samples = to_vector_samples(data);
    flows::TrainConfig tc;
    tc.batch_size = cfg.batch_size;
    tc.epochs = cfg.epochs;
    tc.lr = cfg.lr;
    tc.lr_decay = cfg.lr_decay;
    tc.seed = Rng::derive(cfg.seed, "taiji_train");
    out.loss_trace = flows::train_feature_mse(out.model, samples, tc, 2);
    out.final_loss = out.loss_trace.back();
    return out;
}

/// f̂_y(x): pad, run the flow conditioned on the parameter, keep the first
/// two output dimensions.
inline Vec model_apply(const flows::ParaCFlowModel& m, Span y, Span x) {
    const Vec f = flows::paracflow_features(m, y, x);
    return {f[0], f[1]};
}

inline Vec model_apply(const flows::ParaCFlowModel& m, double y, Span x) {
    const Vec yv{y};
    return model_apply(m, yv, x);
}

/// n-fold composition of the learned map at a fixed parameter.
inline Vec compose_model(const flows::ParaCFlowModel& m, double y, Span x, int n) {
    check_shape(n >= 0, "compose_model: n must be >= 0");
    Vec u(x.begin(), x.end());
    for (int k = 0; k < n; ++k) u = model_apply(m, y, u);
    return u;
}

// ---------------------------------------------------------------------------
// Derivative comparison
// ---------------------------------------------------------------------------

struct DerivativePoint {
    Vec x;
    double rho = 0.0;
    numkit::Mat model_dx;  // 2x2, central differences
    Vec model_dy;          // 2, central differences
    numkit::Mat true_dx;   // analytic
    Vec true_dy;           // analytic
    double rel_error = 0.0;  // Frobenius over the combined 2x3 Jacobian
};

struct DerivativeReport {
    std::vector<DerivativePoint> points;
    double median_rel_error_interior = 0.0;  // rho < 0.9
    double median_angular_error = 0.0;       // radians, over non-tiny columns
    double median_magnitude_error = 0.0;     // relative, over non-tiny columns
    double annulus_half_width = 0.1;
};

namespace detail {
inline double median(Vec v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace detail

/// Compare model derivatives against the analytic field at parameter y over a
/// uniform grid on [-1,1]^2. Points inside the annulus |rho-1| <= 0.1 are
/// recorded but excluded from the summary medians (the target is not
/// differentiable on the unit circle).
inline DerivativeReport derivative_report(const flows::ParaCFlowModel& m, double y,
                                          int grid_per_axis = 41, double fd_step = 1e-5) {
    DerivativeReport rep;
    Vec rel_interior, ang_errors, mag_errors;
    for (int i = 0; i < grid_per_axis; ++i) {
        for (int j = 0; j < grid_per_axis; ++j) {
            DerivativePoint p;
            p.x = {-1.0 + 2.0 * i / (grid_per_axis - 1), -1.0 + 2.0 * j / (grid_per_axis - 1)};
            p.rho = std::hypot(p.x[0], p.x[1]);
            p.model_dx = numkit::fd_jacobian(
                [&](Span xx) { return model_apply(m, y, xx); }, p.x, fd_step);
            {
                const Vec yp{y + fd_step}, ym{y - fd_step};
                const Vec fp = model_apply(m, yp, p.x), fm = model_apply(m, ym, p.x);
                p.model_dy = {(fp[0] - fm[0]) / (2 * fd_step), (fp[1] - fm[1]) / (2 * fd_step)};
            }
            p.true_dx = taiji_dx(y, p.x);
            p.true_dy = taiji_dy(y, p.x);

            double num = 0.0, den = 0.0;
            auto add = [&](double a, double b) {
                num += (a - b) * (a - b);
                den += b * b;
            };
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) add(p.model_dx(r, c), p.true_dx(r, c));
            for (int r = 0; r < 2; ++r) add(p.model_dy[r], p.true_dy[r]);
            p.rel_error = std::sqrt(num) / std::max(1e-12, std::sqrt(den));

            const bool in_annulus = std::abs(p.rho - 1.0) <= rep.annulus_half_width;
            if (!in_annulus && p.rho < 0.9) {
                rel_interior.push_back(p.rel_error);
                // Column-wise arrow comparison (two x-columns and the y-column).
                for (int col = 0; col < 3; ++col) {
                    Vec mv(2), tv(2);
                    for (int r = 0; r < 2; ++r) {
                        mv[r] = col < 2 ? p.model_dx(r, col) : p.model_dy[r];
                        tv[r] = col < 2 ? p.true_dx(r, col) : p.true_dy[r];
                    }
                    const double nm = norm2(mv), nt = norm2(tv);
                    if (nt < 1e-6) continue;
                    const double cosang =
                        std::clamp(dot(mv, tv) / std::max(1e-300, nm * nt), -1.0, 1.0);
                    ang_errors.push_back(std::acos(cosang));
                    mag_errors.push_back(std::abs(nm - nt) / nt);
                }
            }
            rep.points.push_back(std::move(p));
        }
    }
    rep.median_rel_error_interior = detail::median(std::move(rel_interior));
    rep.median_angular_error = detail::median(std::move(ang_errors));
    rep.median_magnitude_error = detail::median(std::move(mag_errors));
    return rep;
}

// ---------------------------------------------------------------------------
// Composition region agreement and test RMSE
// ---------------------------------------------------------------------------

/// Fraction of interior grid points whose model output lands in the same
/// region as the true output. `folds` applies the model repeatedly at y
/// against the ground truth at folds*y.
inline double composition_region_agreement(const flows::ParaCFlowModel& m, double y, int folds,
                                           int grid_per_axis = 200) {
    long agree = 0, total = 0;
    for (int i = 0; i < grid_per_axis; ++i) {
        for (int j = 0; j < grid_per_axis; ++j) {
            const Vec x{-1.0 + 2.0 * i / (grid_per_axis - 1),
                        -1.0 + 2.0 * j / (grid_per_axis - 1)};
            if (std::hypot(x[0], x[1]) > 1.0) continue;
            const Vec truth = taiji_apply(y * folds, x);
            const Vec pred = compose_model(m, y, x, folds);
            ++total;
            if (region_label(truth) == region_label(pred)) ++agree;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(total);
}

/// RMSE of the learned map over fresh samples restricted to rho < rho_max.
inline double test_rmse(const flows::ParaCFlowModel& m, std::uint64_t seed, int n,
                        double rho_max = 0.9) {
    Rng rng(Rng::derive(seed, "taiji_test"));
    double se = 0.0;
    long count = 0;
    while (count < n) {
        const Vec x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        if (std::hypot(x[0], x[1]) >= rho_max) continue;
        const double y = rng.uniform(0.0, 1.0);
        const Vec truth = taiji_apply(y, x);
        const Vec pred = model_apply(m, y, x);
        se += (pred[0] - truth[0]) * (pred[0] - truth[0]) +
              (pred[1] - truth[1]) * (pred[1] - truth[1]);
        ++count;
    }
    return std::sqrt(se / (2.0 * static_cast<double>(count)));
}

// ---------------------------------------------------------------------------
// 100-dimensional-parameter comparison against MLP and Resnet baselines
// ---------------------------------------------------------------------------

struct CoverageStat {
    double y = 0.0;
    double coverage = 0.0;  // fraction of interior cells hit by a prediction
    double rmse = 0.0;      // against the ground truth on interior inputs
};

struct BaselineResult {
    std::string name;
    long param_count = 0;
    std::vector<CoverageStat> stats;  // per evaluation parameter

    double coverage_at(double y) const {
        for (const auto& s : stats)
            if (s.y == y) return s.coverage;
        throw std::invalid_argument("baseline result: no such y");
    }
};

struct BaselineComparison {
    std::vector<BaselineResult> results;

    const BaselineResult& by_name(const std::string& name) const {
        for (const auto& r : results)
            if (r.name == name) return r;
        throw std::invalid_argument("baseline comparison: no such model");
    }
};

struct BaselineConfig {
    int samples = 3000;
    int epochs = 200;
    int batch_size = 64;
    double lr = 0.01;
    Vec eval_params{0.0, 0.5, 1.0};
    int input_grid = 120;
    int coverage_cells = 30;
    std::uint64_t seed = 1;
};

namespace detail {

template <class Predict>
CoverageStat coverage_stat(Predict&& predict, double y, const BaselineConfig& cfg) {
    CoverageStat st;
    st.y = y;
    const int n = cfg.input_grid, cells = cfg.coverage_cells;
    std::vector<char> hit(static_cast<std::size_t>(cells) * cells, 0);
    std::vector<char> interior(static_cast<std::size_t>(cells) * cells, 0);
    for (int ci = 0; ci < cells; ++ci)
        for (int cj = 0; cj < cells; ++cj) {
            const double cx = -1.0 + 2.0 * (ci + 0.5) / cells;
            const double cy = -1.0 + 2.0 * (cj + 0.5) / cells;
            interior[ci * cells + cj] = std::hypot(cx, cy) <= 1.0 ? 1 : 0;
        }
    double se = 0.0;
    long count = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Vec x{-1.0 + 2.0 * i / (n - 1), -1.0 + 2.0 * j / (n - 1)};
            if (std::hypot(x[0], x[1]) > 1.0) continue;
            const Vec pred = predict(x);
            const Vec truth = taiji_apply(y, x);
            se += (pred[0] - truth[0]) * (pred[0] - truth[0]) +
                  (pred[1] - truth[1]) * (pred[1] - truth[1]);
            ++count;
            const int ci = std::clamp(static_cast<int>((pred[0] + 1.0) / 2.0 * cells), 0,
                                      cells - 1);
            const int cj = std::clamp(static_cast<int>((pred[1] + 1.0) / 2.0 * cells), 0,
                                      cells - 1);
            hit[ci * cells + cj] = 1;
        }
    }
    long hits = 0, cells_in = 0;
    for (std::size_t k = 0; k < hit.size(); ++k) {
        if (!interior[k]) continue;
        ++cells_in;
        if (hit[k]) ++hits;
    }
    st.coverage = cells_in == 0 ? 0.0 : static_cast<double>(hits) / cells_in;
    st.rmse = std::sqrt(se / (2.0 * count));
    return st;
}

}  // namespace detail

/// Train the flow, a plain MLP (hidden 128,64,32) and a Resnet on the same
/// 100-dimensional-parameter dataset with identical budgets, then measure
/// how much of the unit disc each learned map still covers at a few fixed
/// parameters. Collapsed mappings leave unreached cells.
inline BaselineComparison run_baseline_comparison(std::uint64_t seed,
                                                  const BaselineConfig& cfg = {}) {
    const auto data = gen_taiji_dataset(cfg.samples, seed, TaijiMode::vector100);
    BaselineComparison cmp;

    // Shared evaluation: parameter vector with all components equal to y.
    auto eval_model = [&](const std::string& name, long params, auto&& predict_at) {
        BaselineResult res;
        res.name = name;
        res.param_count = params;
        for (double y : cfg.eval_params) {
            const Vec yvec(100, y);
            res.stats.push_back(detail::coverage_stat(
                [&](const Vec& x) { return predict_at(yvec, x); }, y, cfg));
        }
        cmp.results.push_back(std::move(res));
    };

    // Para-CFlow on the 100-dim parameter.
    {
        TaijiTrainConfig tc;
        tc.epochs = cfg.epochs;
        tc.batch_size = cfg.batch_size;
        tc.lr = cfg.lr;
        tc.seed = Rng::derive(seed, "compare_flow");
        const TrainedTaiji trained = train_taiji_flow(data, tc);
        eval_model("paracflow", trained.model.param_count(),
                   [m = trained.model](Span y, Span x) { return model_apply(m, y, x); });
    }

    flows::TrainConfig rc;
    rc.epochs = cfg.epochs;
    rc.batch_size = cfg.batch_size;
    rc.lr = cfg.lr;

    std::vector<cbo::RegressorSample> reg_data;
    reg_data.reserve(data.size());
    for (const auto& s : data) reg_data.push_back({concat(s.y, s.x), s.target});

    // MLP with hidden layers (128, 64, 32).
    {
        cbo::MlpRegressor mlp({102, 128, 64, 32, 2}, numkit::Activation::Tanh,
                              Rng::derive(seed, "compare_mlp"));
        rc.seed = Rng::derive(seed, "compare_mlp_fit");
        cbo::fit_regressor(mlp, reg_data, rc);
        eval_model("mlp", mlp.param_count(),
                   [m = std::move(mlp)](Span y, Span x) { return m.forward(concat(y, x)); });
    }

    // Resnet with the nearest tabulated shape, x appended per layer.
    {
        const auto shape = cbo::table_shape(cbo::Family::resnet, 100);
        cbo::ResnetRegressor resnet(102, 2, cbo::hidden_dims(shape), 2,
                                    numkit::Activation::Tanh, Rng::derive(seed, "compare_resnet"));
        rc.seed = Rng::derive(seed, "compare_resnet_fit");
        cbo::fit_regressor(resnet, reg_data, rc);
        eval_model("resnet", resnet.param_count(),
                   [m = std::move(resnet)](Span y, Span x) { return m.forward(concat(y, x)); });
    }
    return cmp;
}

}  // namespace paracflow::taiji

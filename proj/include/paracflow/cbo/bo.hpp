#pragma once

#include "paracflow/cbo/acquisition.hpp"
#include "paracflow/cbo/benchmarks.hpp"

namespace paracflow::cbo {

enum class Strategy { lcb, thompson, random_pick };

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::lcb: return "lcb";
        case Strategy::thompson: return "thompson";
        default: return "random";
    }
}

struct BoStep {
    Vec context;
    double action = 0.0;
    double value = 0.0;
    double best_value = 0.0;
    double regret = 0.0;
    double cum_regret = 0.0;
};

struct BoTrace {
    std::vector<BoStep> steps;
    double final_cum_regret() const { return steps.empty() ? 0.0 : steps.back().cum_regret; }
};

struct BoConfig {
    int init_steps = 100;
    int refit_every = 100;
    double kappa = 1.0;
    bool maximize = false;
    flows::TrainConfig train;  // batch 64, epochs 200, lr 0.01 defaults
    int workers = 1;
};

/// One BO trial with an externally supplied ensemble. The first init_steps
/// actions are uniform over the grid from a stream derived from the seed
/// alone, so every surrogate family sees the identical initialization batch.
/// The ensemble is refitted on the full history every refit_every steps.
/// Regret accounting starts at step 1 and includes the random phase.
inline BoTrace run_bo_with(const ContextualProblem& problem, SurrogateEnsemble& ens,
                           Strategy strategy, int total_steps, std::uint64_t seed,
                           BoConfig cfg = {}) {
    check_shape(total_steps >= cfg.init_steps,
                "run_bo: total_steps must be at least the initialization length");
    const Vec grid = problem.action_grid();
    Rng ctx_rng(Rng::derive(seed, "bo_contexts"));
    Rng act_rng(Rng::derive(seed, "bo_random_actions"));
    Rng ts_rng(Rng::derive(seed, "bo_thompson"));

    BoTrace trace;
    trace.steps.reserve(total_steps);
    std::vector<CboSample> history;
    history.reserve(total_steps);
    double cum = 0.0;

    for (int t = 1; t <= total_steps; ++t) {
        BoStep step;
        step.context = problem.sample_context(ctx_rng);
        if (t <= cfg.init_steps || strategy == Strategy::random_pick) {
            step.action = grid[act_rng.uniform_int(static_cast<int>(grid.size()))];
        } else if (strategy == Strategy::lcb) {
            step.action = acquire_lcb(ens, step.context, grid, cfg.kappa, cfg.maximize);
        } else {
            step.action = acquire_thompson(ens, step.context, grid, ts_rng, cfg.maximize);
        }
        step.value = problem.eval(step.context, step.action);
        const auto [best_a, best_v] = problem.best(step.context, grid);
        (void)best_a;
        step.best_value = best_v;
        step.regret = cfg.maximize ? best_v - step.value : step.value - best_v;
        cum += step.regret;
        step.cum_regret = cum;
        history.push_back({step.context, step.action, step.value});
        trace.steps.push_back(std::move(step));

        const bool needs_model = strategy != Strategy::random_pick;
        if (needs_model && t % cfg.refit_every == 0 && t < total_steps) {
            flows::TrainConfig train_cfg = cfg.train;
            train_cfg.seed = Rng::derive(seed, "bo_refit_" + std::to_string(t));
            ens.fit(history, train_cfg, cfg.workers);
        }
    }
    return trace;
}

inline BoTrace run_bo(const ContextualProblem& problem, Family family, Strategy strategy,
                      int total_steps, std::uint64_t seed, BoConfig cfg = {}) {
    SurrogateEnsemble ens(family, problem.context_dim, Rng::derive(seed, "bo_ensemble"));
    return run_bo_with(problem, ens, strategy, total_steps, seed, cfg);
}

}  // namespace paracflow::cbo

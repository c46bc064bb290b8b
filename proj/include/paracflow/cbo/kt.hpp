#pragma once

#include <map>

#include "paracflow/cbo/bo.hpp"
#include "paracflow/cbo/kendall.hpp"

namespace paracflow::cbo {

struct KtConfig {
    std::vector<int> sizes{500, 1000, 2000, 5000};
    int trials = 5;
    int test_contexts = 1000;  // desk-scale default; the full protocol uses 10000
    std::vector<Family> families{Family::paracflow, Family::mlp, Family::mlp_ascend,
                                 Family::resnet};
    flows::TrainConfig train;
    int workers = 1;
    std::uint64_t seed = 1;
};

struct KtCell {
    Family family = Family::paracflow;
    int size = 0;
    int trial = 0;
    double mean_kt = 0.0;  // mean over test contexts of the per-sweep tau
    long param_count = 0;
};

struct KtSummary {
    Family family = Family::paracflow;
    int size = 0;
    double mean = 0.0;  // over trials
    double stddev = 0.0;
};

struct KtReport {
    std::vector<KtCell> cells;
    std::vector<KtSummary> summaries;

    double summary_mean(Family family, int size) const {
        for (const auto& s : summaries)
            if (s.family == family && s.size == size) return s.mean;
        throw std::invalid_argument("kt report: no such summary cell");
    }
};

/// Rank-consistency experiment: train each family on uniformly sampled
/// (context, action, value) data of each size, then score Kendall's tau of
/// the predicted action sweep against the true sweep on shared test contexts.
inline KtReport kt_experiment(const ContextualProblem& problem, const KtConfig& cfg) {
    check_shape(!cfg.sizes.empty(), "kt_experiment: sizes must be nonempty");
    const Vec grid = problem.action_grid();

    // Shared test contexts: identical across families, sizes and trials.
    std::vector<Vec> test_contexts;
    std::vector<Vec> truth_sweeps;
    {
        Rng rng(Rng::derive(cfg.seed, "kt_test_contexts"));
        test_contexts.reserve(cfg.test_contexts);
        truth_sweeps.reserve(cfg.test_contexts);
        for (int i = 0; i < cfg.test_contexts; ++i) {
            Vec c = problem.sample_context(rng);
            Vec sweep(grid.size());
            for (std::size_t g = 0; g < grid.size(); ++g) sweep[g] = problem.eval(c, grid[g]);
            truth_sweeps.push_back(std::move(sweep));
            test_contexts.push_back(std::move(c));
        }
    }

    struct Job {
        Family family;
        int size;
        int trial;
    };
    std::vector<Job> jobs;
    for (Family f : cfg.families)
        for (int size : cfg.sizes)
            for (int trial = 0; trial < cfg.trials; ++trial) jobs.push_back({f, size, trial});

    KtReport report;
    report.cells.resize(jobs.size());
    parallel_for(jobs.size(), cfg.workers, [&](std::size_t ji) {
        const Job& job = jobs[ji];
        const std::uint64_t trial_seed =
            Rng::derive(cfg.seed, "kt_" + std::string(family_name(job.family)) + "_" +
                                      std::to_string(job.size) + "_" + std::to_string(job.trial));
        // Training data: uniform contexts and uniform continuous actions.
        Rng data_rng(Rng::derive(trial_seed, "data"));
        std::vector<CboSample> data;
        data.reserve(job.size);
        for (int i = 0; i < job.size; ++i) {
            Vec c = problem.sample_context(data_rng);
            const double a = data_rng.uniform(ContextualProblem::kBoxLo,
                                              ContextualProblem::kBoxHi);
            const double v = problem.eval(c, a);
            data.push_back({std::move(c), a, v});
        }
        SurrogateEnsemble ens(job.family, problem.context_dim, Rng::derive(trial_seed, "ens"));
        flows::TrainConfig train_cfg = cfg.train;
        train_cfg.seed = Rng::derive(trial_seed, "fit");
        ens.fit(data, train_cfg, 1);

        double kt_sum = 0.0;
        Vec pred(grid.size());
        for (std::size_t t = 0; t < test_contexts.size(); ++t) {
            for (std::size_t g = 0; g < grid.size(); ++g)
                pred[g] = ens.predict(test_contexts[t], grid[g]).first;
            kt_sum += kendall_tau(pred, truth_sweeps[t]);
        }
        report.cells[ji] = {job.family, job.size, job.trial,
                            kt_sum / static_cast<double>(test_contexts.size()),
                            ens.param_count() / ens.size()};
    });

    // Mean/std over trials per (family, size).
    for (Family f : cfg.families) {
        for (int size : cfg.sizes) {
            Vec vals;
            for (const auto& c : report.cells)
                if (c.family == f && c.size == size) vals.push_back(c.mean_kt);
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= static_cast<double>(vals.size());
            report.summaries.push_back({f, size, mean, std::sqrt(var)});
        }
    }
    return report;
}

}  // namespace paracflow::cbo

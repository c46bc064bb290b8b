#pragma once

#include <memory>

#include "paracflow/cbo/regressors.hpp"
#include "paracflow/core/parallel.hpp"

namespace paracflow::cbo {

enum class Family { paracflow, mlp, mlp_ascend, resnet };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::paracflow: return "paracflow";
        case Family::mlp: return "mlp";
        case Family::mlp_ascend: return "mlp_ascend";
        default: return "resnet";
    }
}

/// Depth/width per context dimension, taken from the size tables used for the
/// regret and rank experiments. Context dims outside {5,10,20} use the
/// nearest tabulated shape.
struct FamilyShape {
    int hidden_layers = 0;
    int hidden_nodes = 0;
    int num_flows = 0;  // coupling layers; flow families only
};

inline FamilyShape table_shape(Family family, int d_c) {
    const int anchors[] = {5, 10, 20};
    int nearest = anchors[0];
    for (int a : anchors)
        if (std::abs(a - d_c) < std::abs(nearest - d_c)) nearest = a;
    if (family == Family::paracflow) {
        if (nearest == 5) return {1, 64, 3};
        if (nearest == 10) return {0, 128, 3};
        return {1, 64, 3};
    }
    if (nearest == 5) return {2, 32, 0};
    if (nearest == 10) return {2, 64, 0};
    return {3, 64, 0};
}

inline std::vector<int> hidden_dims(const FamilyShape& s) {
    return std::vector<int>(static_cast<std::size_t>(s.hidden_layers), s.hidden_nodes);
}

struct CboSample {
    Vec c;
    double a = 0.0;
    double value = 0.0;
};

/// One ensemble member. Targets are standardized internally during fit and
/// de-standardized in predict, so every family trains on comparably scaled
/// losses regardless of the benchmark's output range.
class SurrogateModel {
public:
    virtual ~SurrogateModel() = default;

    void fit(std::span<const CboSample> data, const flows::TrainConfig& cfg) {
        check_shape(!data.empty(), "surrogate fit: empty dataset");
        double mean = 0.0;
        for (const auto& s : data) mean += s.value;
        mean /= static_cast<double>(data.size());
        double var = 0.0;
        for (const auto& s : data) var += (s.value - mean) * (s.value - mean);
        var /= static_cast<double>(data.size());
        target_mean_ = mean;
        target_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
        fit_standardized(data, cfg);
        trained_ = true;
    }

    double predict(Span c, double a) const {
        if (!trained_) throw StateError("surrogate predict: model has not been fitted");
        return target_mean_ + target_scale_ * predict_standardized(c, a);
    }

    bool trained() const { return trained_; }
    virtual long param_count() const = 0;

protected:
    double standardize(double v) const { return (v - target_mean_) / target_scale_; }
    virtual void fit_standardized(std::span<const CboSample>, const flows::TrainConfig&) = 0;
    virtual double predict_standardized(Span c, double a) const = 0;

private:
    bool trained_ = false;
    double target_mean_ = 0.0;
    double target_scale_ = 1.0;
};

class ParacflowSurrogate final : public SurrogateModel {
public:
    ParacflowSurrogate(int d_c, const FamilyShape& shape, std::uint64_t seed) {
        flows::FlowConfig cfg;
        cfg.action_dim = 1;
        cfg.context_dim = d_c;
        cfg.num_layers = shape.num_flows;
        cfg.cond_hidden = hidden_dims(shape);
        cfg.head_hidden = hidden_dims(shape);
        cfg.seed = seed;
        model_ = flows::make_paracflow(cfg);
    }

    long param_count() const override { return model_.param_count(); }
    const flows::ParaCFlowModel& model() const { return model_; }

protected:
    void fit_standardized(std::span<const CboSample> data,
                          const flows::TrainConfig& cfg) override {
        std::vector<flows::ScalarSample> samples;
        samples.reserve(data.size());
        for (const auto& s : data)
            samples.push_back({s.c, Vec{s.a}, standardize(s.value)});
        flows::train_mse(model_, samples, cfg);
    }

    double predict_standardized(Span c, double a) const override {
        const Vec av{a};
        return flows::paracflow_predict(model_, c, av);
    }

private:
    flows::ParaCFlowModel model_;
};

class MlpSurrogate final : public SurrogateModel {
public:
    MlpSurrogate(int d_c, const FamilyShape& shape, std::uint64_t seed) {
        std::vector<int> dims{d_c + 1};
        for (int h : hidden_dims(shape)) dims.push_back(h);
        dims.push_back(1);
        reg_ = MlpRegressor(std::move(dims), Activation::Tanh, seed);
    }

    long param_count() const override { return reg_.param_count(); }

protected:
    void fit_standardized(std::span<const CboSample> data,
                          const flows::TrainConfig& cfg) override {
        std::vector<RegressorSample> samples;
        samples.reserve(data.size());
        for (const auto& s : data) {
            Vec u(s.c.begin(), s.c.end());
            u.push_back(s.a);
            samples.push_back({std::move(u), Vec{standardize(s.value)}});
        }
        fit_regressor(reg_, samples, cfg);
    }

    double predict_standardized(Span c, double a) const override {
        Vec u(c.begin(), c.end());
        u.push_back(a);
        return reg_.forward(u)[0];
    }

private:
    MlpRegressor reg_;
};

class MlpAscendSurrogate final : public SurrogateModel {
public:
    MlpAscendSurrogate(int d_c, const FamilyShape& shape, std::uint64_t seed)
        : reg_(d_c, 1, hidden_dims(shape), 1, Activation::Tanh, seed) {}

    long param_count() const override { return reg_.param_count(); }

protected:
    void fit_standardized(std::span<const CboSample> data,
                          const flows::TrainConfig& cfg) override {
        std::vector<RegressorSample> samples;
        samples.reserve(data.size());
        for (const auto& s : data) {
            Vec u(s.c.begin(), s.c.end());
            u.push_back(s.a);
            samples.push_back({std::move(u), Vec{standardize(s.value)}});
        }
        fit_regressor(reg_, samples, cfg);
    }

    double predict_standardized(Span c, double a) const override {
        Vec u(c.begin(), c.end());
        u.push_back(a);
        return reg_.forward(u)[0];
    }

private:
    MlpAscendRegressor reg_;
};

class ResnetSurrogate final : public SurrogateModel {
public:
    ResnetSurrogate(int d_c, const FamilyShape& shape, std::uint64_t seed)
        : reg_(d_c + 1, 1, hidden_dims(shape), 1, Activation::Tanh, seed) {}

    long param_count() const override { return reg_.param_count(); }
    ResnetRegressor& regressor() { return reg_; }

protected:
    void fit_standardized(std::span<const CboSample> data,
                          const flows::TrainConfig& cfg) override {
        std::vector<RegressorSample> samples;
        samples.reserve(data.size());
        for (const auto& s : data) {
            Vec u(s.c.begin(), s.c.end());
            u.push_back(s.a);
            samples.push_back({std::move(u), Vec{standardize(s.value)}});
        }
        fit_regressor(reg_, samples, cfg);
    }

    double predict_standardized(Span c, double a) const override {
        Vec u(c.begin(), c.end());
        u.push_back(a);
        return reg_.forward(u)[0];
    }

private:
    ResnetRegressor reg_;
};

inline std::unique_ptr<SurrogateModel> make_member(Family family, int d_c, std::uint64_t seed) {
    const FamilyShape shape = table_shape(family, d_c);
    switch (family) {
        case Family::paracflow: return std::make_unique<ParacflowSurrogate>(d_c, shape, seed);
        case Family::mlp: return std::make_unique<MlpSurrogate>(d_c, shape, seed);
        case Family::mlp_ascend: return std::make_unique<MlpAscendSurrogate>(d_c, shape, seed);
        case Family::resnet: return std::make_unique<ResnetSurrogate>(d_c, shape, seed);
    }
    throw std::invalid_argument("make_member: unknown family");
}

/// Ensemble of independently seeded members; the empirical spread of member
/// outputs is the uncertainty measure.
class SurrogateEnsemble {
public:
    SurrogateEnsemble() = default;

    SurrogateEnsemble(Family family, int d_c, std::uint64_t seed, int members = 5)
        : family_(family), d_c_(d_c), seed_(seed) {
        check_shape(members >= 1, "ensemble: need at least one member");
        for (int i = 0; i < members; ++i)
            members_.push_back(make_member(family, d_c, Rng::derive(seed, 1000 + i)));
    }

    /// Inject custom members (test doubles).
    explicit SurrogateEnsemble(std::vector<std::unique_ptr<SurrogateModel>> members)
        : members_(std::move(members)) {}

    Family family() const { return family_; }
    int size() const { return static_cast<int>(members_.size()); }
    const SurrogateModel& member(int i) const { return *members_[i]; }

    bool trained() const {
        for (const auto& m : members_)
            if (!m->trained()) return false;
        return true;
    }

    long param_count() const {
        long n = 0;
        for (const auto& m : members_) n += m->param_count();
        return n;
    }

    /// Each member fits on the same data with its own derived seed stream.
    void fit(std::span<const CboSample> data, const flows::TrainConfig& cfg, int workers = 1) {
        fit_round_ += 1;
        parallel_for(members_.size(), workers, [&](std::size_t i) {
            flows::TrainConfig member_cfg = cfg;
            member_cfg.seed = Rng::derive(cfg.seed, 7000 + 100 * fit_round_ + i);
            members_[i]->fit(data, member_cfg);
        });
    }

    /// Mean and population standard deviation of member predictions.
    std::pair<double, double> predict(Span c, double a) const {
        if (!trained()) throw StateError("ensemble predict: members have not been fitted");
        double mean = 0.0;
        Vec outs(members_.size());
        for (std::size_t i = 0; i < members_.size(); ++i) {
            outs[i] = members_[i]->predict(c, a);
            mean += outs[i];
        }
        mean /= static_cast<double>(members_.size());
        double var = 0.0;
        for (double o : outs) var += (o - mean) * (o - mean);
        var /= static_cast<double>(members_.size());
        return {mean, std::sqrt(var)};
    }

    double member_predict(int i, Span c, double a) const { return members_[i]->predict(c, a); }

private:
    Family family_ = Family::paracflow;
    int d_c_ = 0;
    std::uint64_t seed_ = 0;
    int fit_round_ = 0;
    std::vector<std::unique_ptr<SurrogateModel>> members_;
};

inline SurrogateEnsemble build_surrogate(Family family, int d_c, std::uint64_t seed,
                                         int members = 5) {
    return SurrogateEnsemble(family, d_c, seed, members);
}

}  // namespace paracflow::cbo

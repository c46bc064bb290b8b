#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "paracflow/diffeo/decompose.hpp"
#include "paracflow/diffeo/single_coordinate.hpp"
#include "paracflow/taiji/taiji.hpp"

using namespace paracflow;
using namespace paracflow::diffeo;

namespace {

// C-infinity bump: 1 at 0, 0 outside |s| >= 1.
double bump(double s) {
    const double s2 = s * s;
    if (s2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s2));
}

// Product bump supported on the centered box of half-width r per axis.
double box_bump(Span x, double r) {
    double w = 1.0;
    for (double v : x) w *= bump(v / r);
    return w;
}

// Quintic cutoff: 1 on |s| <= 1, 0 on |s| >= 2, C^2 transition between.
double cutoff(double s) {
    const double u = std::abs(s);
    if (u <= 1.0) return 1.0;
    if (u >= 2.0) return 0.0;
    const double t = u - 1.0;
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

SmoothMap sin_cos_map(double amp) {
    SmoothMap f;
    f.dim = 2;
    f.support_lo = {-1.0, -1.0};
    f.support_hi = {1.0, 1.0};
    f.eval = [amp](Span x) {
        const double w = box_bump(x, 1.0);
        return Vec{x[0] + amp * std::sin(x[1]) * w, x[1] + amp * std::cos(x[0]) * w};
    };
    return f;
}

SmoothMap taiji_map(double y) {
    SmoothMap f;
    f.dim = 2;
    f.support_lo = {-1.0, -1.0};
    f.support_hi = {1.0, 1.0};
    f.eval = [y](Span x) { return taiji::taiji_apply(y, x); };
    f.jac = [y](Span x) { return taiji::taiji_dx(y, Vec(x.begin(), x.end())); };
    return f;
}

double reconstruction_error(const SmoothMap& f, const Decomposition& dec, const GridSpec& grid) {
    const SmoothMap rebuilt = compose_factors(dec.factors, f.dim);
    return sup_distance(rebuilt, f, grid);
}

}  // namespace

TEST_CASE("near_identity_delta: identity map measures zero") {
    const SmoothMap id = SmoothMap::identity(2);
    REQUIRE(near_identity_delta(id, GridSpec::uniform(2, -1.0, 1.0, 21)) == 0.0);
}

TEST_CASE("near_identity_delta: derivative term dominates a calibrated perturbation") {
    // f = x + 0.1·(sin(2 x1)·cutoff, 0): on [-1,1] the perturbation has sup 1
    // and derivative sup 2, so delta ≈ 0.2.
    SmoothMap f;
    f.dim = 2;
    f.support_lo = {-2.0, -2.0};
    f.support_hi = {2.0, 2.0};
    f.eval = [](Span x) {
        return Vec{x[0] + 0.1 * std::sin(2.0 * x[0]) * cutoff(x[0]), x[1]};
    };
    const double delta = near_identity_delta(f, GridSpec::uniform(2, -1.0, 1.0, 101));
    REQUIRE(delta == Catch::Approx(0.2).margin(0.002));
}

TEST_CASE("near_identity_delta: twist map shrinks with its parameter") {
    const GridSpec grid = GridSpec::uniform(2, -1.0, 1.0, 20);  // even count avoids rho == 1
    const double d1 = near_identity_delta(taiji_map(0.01), grid);
    const double d2 = near_identity_delta(taiji_map(0.02), grid);
    REQUIRE(d1 > 0.0);
    REQUIRE(d1 < 0.1);
    REQUIRE(d1 < d2);
}

TEST_CASE("split_last_coordinate: identity splits into identities") {
    const SmoothMap id = SmoothMap::identity(2);
    const GridSpec grid = GridSpec::uniform(2, -1.0, 1.0, 15);
    const auto split = split_last_coordinate(id, grid);
    for_each_point(grid, [&](const Vec& x) {
        const Vec hx = split.h.apply(x);
        const Vec gx = split.g(x);
        for (int i = 0; i < 2; ++i) {
            REQUIRE(std::abs(hx[i] - x[i]) <= 1e-12);
            REQUIRE(std::abs(gx[i] - x[i]) <= 1e-12);
        }
    });
}

TEST_CASE("split_last_coordinate: a last-coordinate map is captured by h exactly") {
    SmoothMap f;
    f.dim = 2;
    f.support_lo = {-1.0, -1.0};
    f.support_hi = {1.0, 1.0};
    f.eval = [](Span x) {
        return Vec{x[0], x[1] + 0.1 * std::sin(x[0] + x[1]) * box_bump(x, 1.0)};
    };
    const GridSpec grid = GridSpec::uniform(2, -0.95, 0.95, 21);
    const auto split = split_last_coordinate(f, grid);
    for_each_point(grid, [&](const Vec& x) {
        const Vec hx = split.h.apply(x);
        const Vec fx = f(x);
        REQUIRE(hx[0] == x[0]);
        REQUIRE(std::abs(hx[1] - fx[1]) <= 1e-12);
        const Vec gx = split.g(x);
        REQUIRE(std::abs(gx[0] - x[0]) <= 1e-10);
        REQUIRE(gx[1] == x[1]);
    });
}

TEST_CASE("split_last_coordinate: g∘h reconstructs a two-coordinate perturbation") {
    const SmoothMap f = sin_cos_map(0.05);
    const GridSpec grid = GridSpec::uniform(2, -1.0, 1.0, 25);
    const auto split = split_last_coordinate(f, grid);
    double worst = 0.0;
    for_each_point(grid, [&](const Vec& x) {
        const Vec rebuilt = split.g(split.h.apply(x));
        const Vec fx = f(x);
        for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(rebuilt[i] - fx[i]));
    });
    REQUIRE(worst <= 1e-8);
}

TEST_CASE("split_last_coordinate: amplification bound from the measured deltas") {
    const SmoothMap f = sin_cos_map(0.05);
    const GridSpec grid = GridSpec::uniform(2, -1.0, 1.0, 25);
    const auto split = split_last_coordinate(f, grid);
    const double delta_g = near_identity_delta(split.g, grid);
    REQUIRE(delta_g <= split.delta_f / (1.0 - split.delta_f) + 1e-6);
}

TEST_CASE("split_last_coordinate: non-monotone slice is a precondition violation") {
    SmoothMap f;
    f.dim = 2;
    f.support_lo = {-1.0, -1.0};
    f.support_hi = {1.0, 1.0};
    f.eval = [](Span x) { return Vec{x[0], x[1] - 1.5 * x[1] * box_bump(x, 1.0)}; };
    const GridSpec grid = GridSpec::uniform(2, -0.8, 0.8, 21);
    DecomposeConfig cfg;
    cfg.enforce_threshold = false;
    REQUIRE_THROWS_AS(split_last_coordinate(f, grid, cfg), PreconditionError);
}

TEST_CASE("decompose_near_identity: identity yields d identity factors") {
    const SmoothMap id = SmoothMap::identity(3);
    const GridSpec grid = GridSpec::uniform(3, -1.0, 1.0, 7);
    const auto dec = decompose_near_identity(id, grid);
    REQUIRE(dec.factors.size() == 3);
    REQUIRE(dec.factors[0].coord == 2);
    REQUIRE(dec.factors[1].coord == 1);
    REQUIRE(dec.factors[2].coord == 0);
    REQUIRE(reconstruction_error(id, dec, grid) <= 1e-12);
}

TEST_CASE("decompose_near_identity: sin/cos perturbation factors and reconstructs") {
    const SmoothMap f = sin_cos_map(0.05);
    const GridSpec grid = GridSpec::uniform(2, -1.0, 1.0, 50);
    const auto dec = decompose_near_identity(f, grid);
    REQUIRE(dec.factors.size() == 2);
    REQUIRE(reconstruction_error(f, dec, grid) <= 1e-7);

    SECTION("factor purity and monotonicity on the grid") {
        for (const auto& factor : dec.factors) {
            for_each_point(grid, [&](const Vec& x) {
                const Vec y = factor.apply(x);
                for (int i = 0; i < 2; ++i)
                    if (i != factor.coord) REQUIRE(y[i] == x[i]);
            });
            const GridSpec coarse = GridSpec::uniform(2, -0.9, 0.9, 9);
            for_each_point(coarse, [&](const Vec& x) {
                REQUIRE(factor.dtau_dcoord(x) > 0.0);
            });
        }
    }

    SECTION("amplification respects the delta/(1-delta) bound per level") {
        for (std::size_t k = 0; k + 1 < dec.levels.size(); ++k) {
            const double d0 = dec.levels[k].delta;
            REQUIRE(dec.levels[k + 1].delta <= d0 / (1.0 - d0) + 1e-6);
        }
    }
}

TEST_CASE("decompose_near_identity: reconstruction stays within 10x root tolerance") {
    const SmoothMap f = sin_cos_map(0.04);
    const GridSpec grid = GridSpec::uniform(2, -1.0, 1.0, 21);
    DecomposeConfig cfg;  // root_tol = 1e-12
    const auto dec = decompose_near_identity(f, grid, cfg);
    REQUIRE(reconstruction_error(f, dec, grid) <= 10.0 * cfg.root_tol);
}

TEST_CASE("decompose_near_identity: restricted twist map") {
    const SmoothMap f = taiji_map(0.05);
    const double half = 0.9 / std::numbers::sqrt2;
    const GridSpec grid = GridSpec::uniform(2, -half, half, 50);
    const auto dec = decompose_near_identity(f, grid);
    REQUIRE(dec.factors.size() == 2);
    REQUIRE(reconstruction_error(f, dec, grid) <= 1e-6);
}

TEST_CASE("decompose_near_identity: far-from-identity input is rejected with the level") {
    const SmoothMap f = sin_cos_map(0.15);  // delta above threshold, slices still monotone
    const GridSpec grid = GridSpec::uniform(2, -1.0, 1.0, 21);
    try {
        decompose_near_identity(f, grid);
        FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
        const std::string msg = e.what();
        REQUIRE(msg.find("coordinate") != std::string::npos);
        REQUIRE(msg.find("delta") != std::string::npos);
    }
}

TEST_CASE("compose_factors: empty list is the identity, one factor acts alone") {
    const SmoothMap id = compose_factors({}, 3);
    const Vec x{0.1, -0.5, 2.0};
    REQUIRE(id(x) == x);

    SingleCoordinateFactor fac;
    fac.dim = 2;
    fac.coord = 0;
    fac.support_lo = {-1, -1};
    fac.support_hi = {1, 1};
    fac.tau = [](Span v) { return v[0] + 0.25 * v[1]; };
    const SmoothMap one = compose_factors({fac});
    const Vec y = one(Vec{1.0, 2.0});
    REQUIRE(y[0] == 1.5);
    REQUIRE(y[1] == 2.0);
}

TEST_CASE("invert_monotone: residual consistency at queried points") {
    auto g = [](double t) { return t + 0.3 * std::tanh(t); };
    Rng rng(66);
    for (int i = 0; i < 200; ++i) {
        const double target = rng.uniform(-2.0, 2.0);
        const double t = invert_monotone(g, target, target, -5.0, 5.0, 1e-13);
        REQUIRE(std::abs(g(t) - target) <= 1e-10);
    }
}

TEST_CASE("analytic_three_step: identity transform maps (x,0) to itself") {
    SingleCoordinateFactor tau;
    tau.dim = 2;
    tau.coord = 1;
    tau.support_lo = {-2, -2};
    tau.support_hi = {2, 2};
    tau.tau = [](Span x) { return x[1]; };
    const Vec z = analytic_three_step(tau, Vec{0.7, -0.4});
    REQUIRE(z[0] == 0.7);
    REQUIRE(std::abs(z[1] + 0.4) <= 1e-12);
    REQUIRE(std::abs(z[2]) <= 1e-12);
}

TEST_CASE("analytic_three_step: random monotone transforms reproduce (x, tau(x), 0)") {
    Rng rng(2718);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 1 + trial % 2;
        const double amp = 0.1 + 0.2 * rng.uniform();
        const double phase = rng.uniform(0.0, 6.28);
        SingleCoordinateFactor tau;
        tau.dim = d;
        tau.coord = d - 1;
        tau.support_lo.assign(d, -2.0);
        tau.support_hi.assign(d, 2.0);
        tau.tau = [amp, phase, d](Span x) {
            double sq = 0.0;
            for (double v : x) sq += v * v;
            return x[d - 1] + amp * std::sin(x[d - 1] + phase) * std::exp(-sq);
        };
        GridSpec grid = GridSpec::uniform(d, -2.0, 2.0, d == 1 ? 101 : 21);
        double worst = 0.0;
        for_each_point(grid, [&](const Vec& x) {
            const Vec z = analytic_three_step(tau, x);
            for (int i = 0; i + 1 < d; ++i) worst = std::max(worst, std::abs(z[i] - x[i]));
            worst = std::max(worst, std::abs(z[d - 1] - tau.tau(x)));
            worst = std::max(worst, std::abs(z[d]));
        });
        REQUIRE(worst <= 1e-9);
    }
}

#pragma once

#include <cmath>

#include "paracflow/core/common.hpp"
#include "paracflow/core/rng.hpp"
#include "paracflow/numkit/mat.hpp"

namespace paracflow::taiji {

using numkit::Mat;

/// Parametric rotation that twists the inside of the unit disc by
/// y·arccos(ρ) and freezes everything outside: x ↦ ρ(cos θ̃, sin θ̃) with
/// θ̃ = θ + y·arccos(min(ρ,1)). Norm-preserving for every (y, x).
inline Vec taiji_apply(double y, Span x) {
    check_shape(x.size() == 2, "taiji_apply: x must be 2-dimensional");
    const double rho = std::hypot(x[0], x[1]);
    if (y == 0.0 || rho >= 1.0 || rho == 0.0) return Vec(x.begin(), x.end());
    const double alpha = std::acos(rho);  // arccos(min(rho,1)) for rho < 1
    const double theta = std::atan2(x[1], x[0]);
    const double tt = theta + y * alpha;
    return {rho * std::cos(tt), rho * std::sin(tt)};
}

/// Analytic ∂f/∂y: arccos(min(ρ,1))·(−ρ sin θ̃, ρ cos θ̃); zero outside the
/// disc. The map is not differentiable on ρ = 1; evaluating there sets the
/// flag instead of throwing.
inline Vec taiji_dy(double y, Span x, bool* on_unit_circle = nullptr) {
    check_shape(x.size() == 2, "taiji_dy: x must be 2-dimensional");
    const double rho = std::hypot(x[0], x[1]);
    if (on_unit_circle) *on_unit_circle = rho == 1.0;
    if (rho >= 1.0 || rho == 0.0) return {0.0, 0.0};
    const double alpha = std::acos(rho);
    const double theta = std::atan2(x[1], x[0]);
    const double tt = theta + y * alpha;
    return {-alpha * rho * std::sin(tt), alpha * rho * std::cos(tt)};
}

/// Analytic ∂f/∂x (2×2), valid away from ρ = 1.
inline Mat taiji_dx(double y, Span x) {
    check_shape(x.size() == 2, "taiji_dx: x must be 2-dimensional");
    const double rho = std::hypot(x[0], x[1]);
    if (rho >= 1.0) return Mat::identity(2);
    if (rho == 0.0) {
        // At the origin θ̃ jumps with θ but the map is the rotation by y·π/2.
        const double a = y * std::acos(0.0);
        Mat j(2, 2);
        j(0, 0) = std::cos(a);
        j(0, 1) = -std::sin(a);
        j(1, 0) = std::sin(a);
        j(1, 1) = std::cos(a);
        return j;
    }
    const double alpha = std::acos(rho);
    const double theta = std::atan2(x[1], x[0]);
    const double tt = theta + y * alpha;
    const double ct = std::cos(tt), st = std::sin(tt);
    // drho/dx = x/rho; dtheta/dx = (-x2, x1)/rho^2; dalpha/drho = -1/sqrt(1-rho^2)
    const double drho_dx1 = x[0] / rho, drho_dx2 = x[1] / rho;
    const double dth_dx1 = -x[1] / (rho * rho), dth_dx2 = x[0] / (rho * rho);
    const double dalpha = -1.0 / std::sqrt(1.0 - rho * rho);
    const double dtt_dx1 = dth_dx1 + y * dalpha * drho_dx1;
    const double dtt_dx2 = dth_dx2 + y * dalpha * drho_dx2;
    Mat j(2, 2);
    j(0, 0) = ct * drho_dx1 - rho * st * dtt_dx1;
    j(0, 1) = ct * drho_dx2 - rho * st * dtt_dx2;
    j(1, 0) = st * drho_dx1 + rho * ct * dtt_dx1;
    j(1, 1) = st * drho_dx2 + rho * ct * dtt_dx2;
    return j;
}

enum class Region { black, white, yellow };

/// Fig-style coloring: black for x2 > 0 inside the disc, white for x2 <= 0
/// inside, yellow outside.
inline Region region_label(Span x) {
    const double rho = std::hypot(x[0], x[1]);
    if (rho > 1.0) return Region::yellow;
    return x[1] > 0.0 ? Region::black : Region::white;
}

enum class TaijiMode { scalar, vector100 };

struct TaijiSample {
    Vec x;       // in [-1,1]^2
    Vec y;       // length 1 (scalar) or 100 (vector100)
    Vec target;  // f at the effective parameter
    double y_base = 0.0;  // latent mean of the noisy components (vector mode)
};

/// Scalar mode: x ~ U[-1,1]^2, y ~ U[0,1], target f_y(x).
/// vector100 mode: y components ~ N(y_base, 0.16) (variance), target
/// f_avg(y)(x).
inline std::vector<TaijiSample> gen_taiji_dataset(int n, std::uint64_t seed, TaijiMode mode) {
    check_shape(n >= 1, "gen_taiji_dataset: n must be >= 1");
    Rng rng(Rng::derive(seed, "taiji_dataset"));
    std::vector<TaijiSample> data;
    data.reserve(n);
    const double noise_sd = std::sqrt(0.16);
    for (int i = 0; i < n; ++i) {
        TaijiSample s;
        s.x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        if (mode == TaijiMode::scalar) {
            s.y = {rng.uniform(0.0, 1.0)};
            s.y_base = s.y[0];
            s.target = taiji_apply(s.y[0], s.x);
        } else {
            s.y_base = rng.uniform(0.0, 1.0);
            s.y.resize(100);
            double sum = 0.0;
            for (double& v : s.y) {
                v = rng.normal(s.y_base, noise_sd);
                sum += v;
            }
            s.target = taiji_apply(sum / 100.0, s.x);
        }
        data.push_back(std::move(s));
    }
    return data;
}

}  // namespace paracflow::taiji

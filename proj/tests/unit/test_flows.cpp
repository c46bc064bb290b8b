#include <catch2/catch_amalgamated.hpp>

#include "paracflow/flows/model.hpp"
#include "paracflow/numkit/fd.hpp"
#include "paracflow/numkit/svd.hpp"

using namespace paracflow;
using namespace paracflow::flows;
using numkit::Mat;

namespace {

CouplingLayer tiny_layer(int dim, int split, int cond_dim, std::uint64_t seed,
                         numkit::InitMode mode = numkit::InitMode::GlorotUniform) {
    Rng rng(seed);
    return make_coupling(dim, split, cond_dim, {8}, numkit::Activation::Tanh, rng, mode);
}

Vec random_vec(Rng& rng, int n, double lo = -2.0, double hi = 2.0) {
    Vec v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

double det_by_elimination(Mat a) {
    double det = 1.0;
    const int n = a.rows;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (a(pivot, col) == 0.0) return 0.0;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(a(pivot, c), a(col, c));
            det = -det;
        }
        det *= a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double factor = a(r, col) / a(col, col);
            for (int c = col; c < n; ++c) a(r, c) -= factor * a(col, c);
        }
    }
    return det;
}

}  // namespace

TEST_CASE("coupling_forward: zero conditioners give the identity") {
    CouplingLayer layer = tiny_layer(4, 2, 1, 9, numkit::InitMode::Zeros);
    const Vec c{0.7};
    const Vec x{1.0, -2.0, 3.0, 0.25};
    REQUIRE(coupling_forward(layer, c, x) == x);
}

TEST_CASE("coupling_forward: hand-evaluated shift layer") {
    // d=2, d'=1, sigma == 0, t(c,x1) = x1: (2,3) -> (2, 3*e^0 + 2) = (2,5).
    CouplingLayer layer;
    layer.dim = 2;
    layer.split = 1;
    layer.cond_dim = 0;
    Mat w(1, 1);
    w(0, 0) = 1.0;
    layer.t_net.dims = {1, 1};
    layer.t_net.weights = {w};
    layer.t_net.biases = {Vec{0.0}};
    Mat wz(1, 1);
    layer.sigma_net.dims = {1, 1};
    layer.sigma_net.weights = {wz};
    layer.sigma_net.biases = {Vec{0.0}};
    layer.validate();

    const Vec empty;
    const Vec y = coupling_forward(layer, empty, Vec{2.0, 3.0});
    REQUIRE(y == Vec{2.0, 5.0});
    const Vec back = coupling_inverse(layer, empty, Vec{2.0, 5.0});
    REQUIRE(back == Vec{2.0, 3.0});
}

TEST_CASE("coupling round trip: 1000 random contexts and points") {
    CouplingLayer layer = tiny_layer(5, 2, 2, 31);
    Rng rng(77);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vec c = random_vec(rng, 2);
        const Vec x = random_vec(rng, 5);
        const Vec y = coupling_forward(layer, c, x);
        const Vec back = coupling_inverse(layer, c, y);
        for (int k = 0; k < 5; ++k) worst = std::max(worst, std::abs(back[k] - x[k]));
        // Pass-through block is bit-identical.
        REQUIRE(y[0] == x[0]);
        REQUIRE(y[1] == x[1]);
    }
    REQUIRE(worst <= 1e-10);
}

TEST_CASE("coupling log-determinant equals the sigma sum and the FD determinant") {
    CouplingLayer layer = tiny_layer(3, 1, 1, 55);
    Rng rng(3);
    for (int i = 0; i < 5; ++i) {
        const Vec c = random_vec(rng, 1);
        const Vec x = random_vec(rng, 3, -1.0, 1.0);
        const double ld = coupling_log_det(layer, c, x);
        const Mat j = numkit::fd_jacobian(
            [&](Span xx) { return coupling_forward(layer, c, xx); }, x, 1e-6);
        REQUIRE(ld == Catch::Approx(std::log(std::abs(det_by_elimination(j)))).margin(1e-4));
    }
}

TEST_CASE("coupling backward matches finite differences") {
    CouplingLayer layer = tiny_layer(4, 2, 2, 12);
    Rng rng(5);
    const Vec c = random_vec(rng, 2);
    const Vec x = random_vec(rng, 4);
    const Vec adj = random_vec(rng, 4);

    CouplingTape tape;
    coupling_forward(layer, c, x, tape);
    CouplingGrads grads = CouplingGrads::zeros_like(layer);
    Vec dx;
    coupling_backward(layer, tape, adj, grads, dx);

    // Input adjoint vs FD of adj . f(x).
    const Vec fd_dx = numkit::fd_gradient(
        [&](Span xx) { return dot(adj, coupling_forward(layer, c, xx)); }, x, 1e-6);
    for (int k = 0; k < 4; ++k) REQUIRE(dx[k] == Catch::Approx(fd_dx[k]).margin(1e-6));

    // One conditioner weight vs FD.
    CouplingLayer probe = layer;
    const double h = 1e-6;
    probe.t_net.weights[0].data[3] += h;
    const double fp = dot(adj, coupling_forward(probe, c, x));
    probe.t_net.weights[0].data[3] -= 2 * h;
    const double fm = dot(adj, coupling_forward(probe, c, x));
    REQUIRE(grads.t.w[0].data[3] == Catch::Approx((fp - fm) / (2 * h)).margin(1e-6));
}

TEST_CASE("permutations compose with couplings without breaking round trips") {
    Rng rng(100);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 3 + rng.uniform_int(6);
        Permutation p = Permutation::random(d, rng);
        REQUIRE(p.is_bijection());
        const Vec x = random_vec(rng, d);
        REQUIRE(p.invert(p.apply(x)) == x);
    }
}

TEST_CASE("ascend: zero matrix is zero padding, general case by hand") {
    Mat w0(2, 3);
    REQUIRE(ascend(Vec{1.5, -2.0}, w0) == Vec{1.5, -2.0, 0.0, 0.0, 0.0});

    Mat w(2, 1);
    w(0, 0) = 1.0;
    w(1, 0) = 1.0;
    REQUIRE(ascend(Vec{1.0, 2.0}, w) == Vec{1.0, 2.0, 3.0});

    Rng rng(8);
    Mat wr(3, 2);
    for (double& v : wr.data) v = rng.uniform(-1.0, 1.0);
    const Vec a = random_vec(rng, 3);
    const Vec out = ascend(a, wr);
    REQUIRE(out[0] == a[0]);
    REQUIRE(out[1] == a[1]);
    REQUIRE(out[2] == a[2]);
}

TEST_CASE("paracflow_features: empty and identity compositions reduce to ascend") {
    FlowConfig cfg;
    cfg.action_dim = 2;
    cfg.context_dim = 1;
    cfg.width = 5;
    cfg.num_layers = 0;
    cfg.seed = 4;
    ParaCFlowModel m0 = make_paracflow(cfg);
    const Vec c{0.3}, a{1.0, -1.0};
    REQUIRE(paracflow_features(m0, c, a) == ascend(a, m0.ascend_w));

    cfg.num_layers = 3;
    cfg.zero_init_output = false;
    ParaCFlowModel m = make_paracflow(cfg);
    for (auto& layer : m.layers) {
        for (auto& w : layer.sigma_net.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
        for (auto& b : layer.sigma_net.biases) std::fill(b.begin(), b.end(), 0.0);
        for (auto& w : layer.t_net.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
        for (auto& b : layer.t_net.biases) std::fill(b.begin(), b.end(), 0.0);
    }
    for (auto& p : m.perms) p = Permutation::identity(m.width);
    REQUIRE(paracflow_features(m, c, a) == ascend(a, m.ascend_w));
}

TEST_CASE("paracflow_predict: zero head and additive head") {
    FlowConfig cfg;
    cfg.action_dim = 2;
    cfg.context_dim = 0;
    cfg.width = 5;
    cfg.num_layers = 2;
    cfg.seed = 11;
    ParaCFlowModel m = make_paracflow(cfg);  // zero-init head
    const Vec c{}, a{0.4, -0.9};
    REQUIRE(paracflow_predict(m, c, a) == 0.0);

    // Head = sum of coordinates, identity flow, W = 0: prediction is sum(a).
    cfg.zero_ascend = true;
    ParaCFlowModel ms = make_paracflow(cfg);
    for (auto& p : ms.perms) p = Permutation::identity(ms.width);
    for (auto& layer : ms.layers)
        for (auto& w : layer.t_net.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
    ms.head.dims = {5, 1};
    Mat hw(1, 5);
    for (double& v : hw.data) v = 1.0;
    ms.head.weights = {hw};
    ms.head.biases = {Vec{0.0}};
    REQUIRE(paracflow_predict(ms, c, a) == Catch::Approx(0.4 - 0.9).epsilon(1e-14));
}

TEST_CASE("flow body round trip across widths and depths") {
    Rng rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        FlowConfig cfg;
        cfg.action_dim = 1 + rng.uniform_int(6);
        cfg.width = cfg.action_dim + 1 + rng.uniform_int(8);
        cfg.context_dim = rng.uniform_int(3);
        cfg.num_layers = 1 + rng.uniform_int(6);
        cfg.zero_init_output = false;
        cfg.seed = rng.raw();
        ParaCFlowModel m = make_paracflow(cfg);
        const Vec c = random_vec(rng, cfg.context_dim);
        const Vec x = random_vec(rng, m.width);
        const Vec y = flow_forward(m, c, x);
        const Vec back = flow_inverse(m, c, y);
        for (int k = 0; k < m.width; ++k) worst = std::max(worst, std::abs(back[k] - x[k]));
    }
    REQUIRE(worst <= 1e-10);
}

TEST_CASE("rank preservation: feature Jacobian w.r.t. the action has full rank") {
    Rng rng(321);
    for (int trial = 0; trial < 5; ++trial) {
        FlowConfig cfg;
        cfg.action_dim = 2;
        cfg.context_dim = 2;
        cfg.width = 5;
        cfg.num_layers = 4;
        cfg.zero_init_output = false;
        cfg.seed = 1000 + trial;
        ParaCFlowModel m = make_paracflow(cfg);
        for (int pt = 0; pt < 20; ++pt) {
            const Vec c = random_vec(rng, 2);
            const Vec a = random_vec(rng, 2);
            const Mat j = numkit::fd_jacobian(
                [&](Span aa) { return paracflow_features(m, c, aa); }, a, 1e-5);
            REQUIRE(numkit::numerical_rank(j, 1e-8) == 2);
        }
    }
}

TEST_CASE("model backward matches finite differences through the whole stack") {
    FlowConfig cfg;
    cfg.action_dim = 2;
    cfg.context_dim = 2;
    cfg.width = 5;
    cfg.num_layers = 3;
    cfg.cond_hidden = {6};
    cfg.head_hidden = {5};
    cfg.zero_init_output = false;
    cfg.seed = 99;
    ParaCFlowModel m = make_paracflow(cfg);

    Rng rng(17);
    const Vec c = random_vec(rng, 2, -1.0, 1.0);
    const Vec a = random_vec(rng, 2, -1.0, 1.0);

    ModelTape tape;
    const double pred = paracflow_predict(m, c, a, tape);
    (void)pred;
    ModelGrads grads = ModelGrads::zeros_like(m);
    Vec da;
    model_backward_predict(m, tape, 1.0, grads, &da);

    // Action adjoint vs FD.
    const Vec fd_da = numkit::fd_gradient(
        [&](Span aa) { return paracflow_predict(m, c, aa); }, a, 1e-6);
    for (int k = 0; k < 2; ++k) REQUIRE(da[k] == Catch::Approx(fd_da[k]).margin(1e-6));

    // Spot-check parameter gradients: ascend W, one conditioner, head.
    auto fd_param = [&](double* p) {
        const double h = 1e-6;
        const double orig = *p;
        *p = orig + h;
        const double fp = paracflow_predict(m, c, a);
        *p = orig - h;
        const double fm = paracflow_predict(m, c, a);
        *p = orig;
        return (fp - fm) / (2 * h);
    };
    REQUIRE(grads.ascend_w.data[1] ==
            Catch::Approx(fd_param(&m.ascend_w.data[1])).margin(1e-6));
    REQUIRE(grads.layers[1].t.w[0].data[2] ==
            Catch::Approx(fd_param(&m.layers[1].t_net.weights[0].data[2])).margin(1e-6));
    REQUIRE(grads.layers[2].sigma.w[1].data[3] ==
            Catch::Approx(fd_param(&m.layers[2].sigma_net.weights[1].data[3])).margin(1e-6));
    REQUIRE(grads.head.w[0].data[4] ==
            Catch::Approx(fd_param(&m.head.weights[0].data[4])).margin(1e-6));
}

TEST_CASE("sigma clamp keeps forward finite under a wild conditioner") {
    CouplingLayer layer = tiny_layer(3, 2, 0, 777);
    for (auto& w : layer.sigma_net.weights)
        for (double& v : w.data) v *= 1e4;
    const Vec empty;
    const Vec y = coupling_forward(layer, empty, Vec{0.5, -0.5, 2.0});
    REQUIRE(all_finite(y));
    REQUIRE(std::abs(y[2]) <= 2.0 * std::exp(8.0) + 100.0);
}

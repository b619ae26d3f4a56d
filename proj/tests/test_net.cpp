#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "advids/adam.hpp"
#include "advids/net.hpp"
#include "oracles.hpp"

using namespace advids;

TEST_CASE("init_network parameter count for the wide architecture") {
    const dense_net net = init_network({28, 300, 100, 40, 2}, 42);
    CHECK(net.parameter_count() == 42922);
    CHECK(net.layer_count() == 4);
    CHECK(net.input_dim() == 28);
    CHECK(net.output_dim() == 2);
}

TEST_CASE("init_network is deterministic for a fixed seed") {
    const dense_net a = init_network({2, 2}, 0);
    const dense_net b = init_network({2, 2}, 0);
    REQUIRE(a.weights[0].data.size() == b.weights[0].data.size());
    for (std::size_t k = 0; k < a.weights[0].data.size(); ++k)
        CHECK(a.weights[0].data[k] == b.weights[0].data[k]);
    const dense_net c = init_network({2, 2}, 1);
    CHECK(a.weights[0].data != c.weights[0].data);
}

TEST_CASE("init_network accepts the 200-wide architecture") {
    const dense_net net = init_network({16, 200, 200, 200, 2}, 7);
    CHECK(net.layer_sizes == std::vector<std::size_t>{16, 200, 200, 200, 2});
}

TEST_CASE("init_network rejects bad architectures") {
    CHECK_THROWS_AS(init_network({}, 0), config_error);
    CHECK_THROWS_AS(init_network({5}, 0), config_error);
    CHECK_THROWS_AS(init_network({5, 0, 2}, 0), config_error);
}

TEST_CASE("init_network weights are bounded by 1/sqrt(fan_in) and biases are zero") {
    const dense_net net = init_network({9, 4, 2}, 3);
    const double bound = 1.0 / 3.0;
    for (const double v : net.weights[0].data) {
        CHECK(v >= -bound);
        CHECK(v <= bound);
    }
    for (const auto& b : net.biases)
        for (const double v : b) CHECK(v == 0.0);
}

TEST_CASE("forward on the all-zero net is uniform") {
    dense_net net = init_network({3, 4, 2}, 0);
    for (auto& w : net.weights) w.data.assign(w.data.size(), 0.0);
    matrix X(2, 3);
    X.set_row(0, {0.3, -1.0, 2.5});
    X.set_row(1, {0.0, 0.0, 0.0});
    const matrix lp = forward(net, X).log_probs();
    const double half = std::log(0.5);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t o = 0; o < 2; ++o) CHECK(lp(i, o) == Catch::Approx(half).margin(1e-15));
}

TEST_CASE("forward log-probabilities normalize row-wise") {
    rng r(11);
    for (int rep = 0; rep < 20; ++rep) {
        const auto inst = oracles::random_kink_free_instance(r.next_u64());
        const matrix lp = forward(inst.net, inst.X).log_probs();
        for (std::size_t i = 0; i < lp.rows; ++i) {
            double s = 0.0;
            for (std::size_t o = 0; o < lp.cols; ++o) s += std::exp(lp(i, o));
            CHECK(std::abs(s - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("forward matches the scalar oracle on a hand-fixed net") {
    dense_net net = init_network({2, 3, 2}, 0);
    net.weights[0] = matrix(3, 2, {0.5, -0.25, 1.0, 2.0, -1.5, 0.75});
    net.biases[0] = {0.1, -0.2, 0.3};
    net.weights[1] = matrix(2, 3, {1.0, -1.0, 0.5, -0.5, 2.0, -1.0});
    net.biases[1] = {0.05, -0.05};

    matrix X(1, 2);
    X.set_row(0, {1.0, 0.0});
    const matrix lp = forward(net, X).log_probs();

    const std::vector<double> expect = oracles::scalar_log_probs(net, {1.0, 0.0});
    CHECK(std::abs(lp(0, 0) - expect[0]) < 1e-12);
    CHECK(std::abs(lp(0, 1) - expect[1]) < 1e-12);
    // frozen values from the scalar route
    CHECK(lp(0, 0) == Catch::Approx(-1.620417409918451).epsilon(1e-12));
    CHECK(lp(0, 1) == Catch::Approx(-0.22041740991845105).epsilon(1e-12));
}

TEST_CASE("forward is pure") {
    const auto inst = oracles::random_kink_free_instance(99);
    const matrix a = forward(inst.net, inst.X).log_probs();
    const matrix b = forward(inst.net, inst.X).log_probs();
    CHECK(a.data == b.data);
}

TEST_CASE("forward rejects bad input") {
    const dense_net net = init_network({3, 2}, 0);
    CHECK_THROWS_AS(forward(net, matrix(1, 4)), shape_error);
    matrix bad(1, 3);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(forward(net, bad), numeric_error);
}

TEST_CASE("loss_nll on perfect and uniform predictions") {
    matrix lp(2, 2);
    lp.set_row(0, {0.0, -40.0});
    lp.set_row(1, {-40.0, 0.0});
    CHECK(loss_nll(lp, {0, 1}) == 0.0);

    matrix uniform(3, 2);
    const double half = std::log(0.5);
    for (double& v : uniform.data) v = half;
    CHECK(loss_nll(uniform, {0, 1, 1}) == Catch::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("loss_nll matches the scalar oracle on a random batch") {
    rng r(5);
    const auto inst = oracles::random_kink_free_instance(r.next_u64());
    matrix X(8, inst.net.input_dim());
    for (double& v : X.data) v = r.uniform(-1.0, 1.0);
    std::vector<int> y(8);
    for (int& v : y) v = static_cast<int>(r.uniform_index(2));

    const double lib = loss_nll(forward(inst.net, X).log_probs(), y);
    const double oracle = oracles::scalar_mean_nll(inst.net, X, y);
    CHECK(std::abs(lib - oracle) < 1e-12);
    CHECK(lib >= 0.0);
}

TEST_CASE("loss_nll rejects labels outside {0,1}") {
    matrix lp(1, 2);
    lp.set_row(0, {-0.5, -0.9});
    CHECK_THROWS_AS(loss_nll(lp, {2}), data_error);
    CHECK_THROWS_AS(loss_nll(lp, {-1}), data_error);
}

TEST_CASE("backward input gradients vanish on the zero net") {
    dense_net net = init_network({4, 3, 2}, 0);
    for (auto& w : net.weights) w.data.assign(w.data.size(), 0.0);
    matrix X(3, 4);
    rng r(2);
    for (double& v : X.data) v = r.uniform(-1.0, 1.0);
    const forward_trace trace = forward(net, X);
    const gradients g = backward(net, trace, {1, 0, 1});
    for (const double v : g.input_grads.data) CHECK(v == 0.0);
}

TEST_CASE("backward matches central finite differences") {
    rng r(31337);
    for (int rep = 0; rep < 25; ++rep) {
        const auto inst = oracles::random_kink_free_instance(r.next_u64());
        const forward_trace trace = forward(inst.net, inst.X);
        const gradients analytic = backward(inst.net, trace, inst.y);
        const oracles::fd_gradients numeric =
            oracles::finite_difference_gradients(inst.net, inst.X, inst.y);

        double worst = 0.0;
        for (std::size_t l = 0; l < inst.net.layer_count(); ++l) {
            for (std::size_t k = 0; k < analytic.weight_grads[l].data.size(); ++k)
                worst = std::max(worst, oracles::rel_err(analytic.weight_grads[l].data[k],
                                                         numeric.weight_grads[l].data[k]));
            for (std::size_t k = 0; k < analytic.bias_grads[l].size(); ++k)
                worst = std::max(worst, oracles::rel_err(analytic.bias_grads[l][k],
                                                         numeric.bias_grads[l][k]));
        }
        for (std::size_t k = 0; k < analytic.input_grads.data.size(); ++k)
            worst = std::max(
                worst, oracles::rel_err(analytic.input_grads.data[k], numeric.input_grads.data[k]));
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("backward rejects a mismatched trace") {
    const dense_net a = init_network({3, 5, 2}, 0);
    const dense_net b = init_network({3, 4, 2}, 0);
    const forward_trace trace = forward(a, matrix(2, 3));
    CHECK_THROWS_AS(backward(b, trace, std::vector<int>{0, 1}), shape_error);
}

TEST_CASE("adam_step with zero gradients leaves parameters unchanged") {
    dense_net net = init_network({3, 4, 2}, 8);
    const dense_net before = net;
    adam_state state = make_adam_state(net);
    gradients g;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        g.weight_grads.emplace_back(net.weights[l].rows, net.weights[l].cols);
        g.bias_grads.emplace_back(net.biases[l].size(), 0.0);
    }
    g.input_grads = matrix(1, 3);
    adam_step(net, g, state, 0.05);
    CHECK(state.timestep == 1);
    for (std::size_t l = 0; l < net.layer_count(); ++l)
        CHECK(net.weights[l].data == before.weights[l].data);
}

TEST_CASE("first adam step with unit gradient moves the parameter by about lr") {
    dense_net net = init_network({1, 1}, 0);
    net.weights[0](0, 0) = 0.7;
    net.biases[0][0] = 0.0;
    adam_state state = make_adam_state(net);
    gradients g;
    g.weight_grads.emplace_back(1, 1);
    g.weight_grads[0](0, 0) = 1.0;
    g.bias_grads.emplace_back(1, 0.0);
    g.input_grads = matrix(1, 1);
    adam_step(net, g, state, 0.01);
    CHECK(0.7 - net.weights[0](0, 0) == Catch::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("adam drives w^2 toward zero, matching the scalar recurrence") {
    dense_net net = init_network({1, 1}, 0);
    net.weights[0](0, 0) = 1.0;
    adam_state state = make_adam_state(net);

    // scalar oracle recurrence, run side by side
    double w = 1.0, m = 0.0, v = 0.0;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.01;

    for (int t = 1; t <= 200; ++t) {
        gradients g;
        g.weight_grads.emplace_back(1, 1);
        g.weight_grads[0](0, 0) = 2.0 * net.weights[0](0, 0);
        g.bias_grads.emplace_back(1, 0.0);
        g.input_grads = matrix(1, 1);
        adam_step(net, g, state, lr);

        const double grad = 2.0 * w;
        m = b1 * m + (1 - b1) * grad;
        v = b2 * v + (1 - b2) * grad * grad;
        const double mh = m / (1 - std::pow(b1, t));
        const double vh = v / (1 - std::pow(b2, t));
        w -= lr * mh / (std::sqrt(vh) + eps);
    }
    // gradient for the bias stays zero, so only the weight moves
    CHECK(std::abs(net.weights[0](0, 0) - w) < 1e-12);
    CHECK(net.weights[0](0, 0) == Catch::Approx(0.01557248531724666).margin(1e-9));
    CHECK(std::abs(net.weights[0](0, 0)) < 0.5);
}

TEST_CASE("adam_step rejects non-finite gradients and keeps parameters") {
    dense_net net = init_network({2, 2}, 1);
    const dense_net before = net;
    adam_state state = make_adam_state(net);
    gradients g;
    g.weight_grads.emplace_back(2, 2);
    g.weight_grads[0](0, 0) = std::numeric_limits<double>::infinity();
    g.bias_grads.emplace_back(2, 0.0);
    g.input_grads = matrix(1, 2);
    CHECK_THROWS_AS(adam_step(net, g, state, 0.01), numeric_error);
    CHECK(net.weights[0].data == before.weights[0].data);
    CHECK(state.timestep == 0);
}

TEST_CASE("adam_step rejects a non-positive learning rate") {
    dense_net net = init_network({2, 2}, 1);
    adam_state state = make_adam_state(net);
    gradients g;
    g.weight_grads.emplace_back(2, 2);
    g.bias_grads.emplace_back(2, 0.0);
    g.input_grads = matrix(1, 2);
    CHECK_THROWS_AS(adam_step(net, g, state, 0.0), config_error);
}

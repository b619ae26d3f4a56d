#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "advids/error.hpp"
#include "advids/net.hpp"

namespace advids {

/// First and second moment accumulators, shaped like the net's parameters.
struct adam_state {
    std::vector<matrix> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    std::int64_t timestep = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

inline adam_state make_adam_state(const dense_net& net) {
    adam_state s;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        s.m_w.emplace_back(net.weights[l].rows, net.weights[l].cols);
        s.v_w.emplace_back(net.weights[l].rows, net.weights[l].cols);
        s.m_b.emplace_back(net.biases[l].size(), 0.0);
        s.v_b.emplace_back(net.biases[l].size(), 0.0);
    }
    return s;
}

namespace detail {

inline void adam_update(double* param, double* m, double* v, const double* g, std::size_t n,
                        const adam_state& s, double lr, double c1, double c2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + s.epsilon);
    }
}

}  // namespace detail

/// One bias-corrected Adam update in place. Parameters are left untouched
/// when the gradients contain non-finite values.
inline void adam_step(dense_net& net, const gradients& grads, adam_state& state, double lr) {
    if (!(lr > 0.0)) throw config_error("adam_step: learning rate must be positive");
    if (grads.weight_grads.size() != net.layer_count() ||
        grads.bias_grads.size() != net.layer_count())
        throw shape_error("adam_step: gradient layer count does not match net");
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        if (!grads.weight_grads[l].same_shape(net.weights[l]) ||
            grads.bias_grads[l].size() != net.biases[l].size())
            throw shape_error("adam_step: gradient shapes do not match net");
    }
    if (!grads.all_finite()) throw numeric_error("adam_step: non-finite gradients");

    state.timestep += 1;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.timestep));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.timestep));
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        detail::adam_update(net.weights[l].data.data(), state.m_w[l].data.data(),
                            state.v_w[l].data.data(), grads.weight_grads[l].data.data(),
                            net.weights[l].data.size(), state, lr, c1, c2);
        detail::adam_update(net.biases[l].data(), state.m_b[l].data(), state.v_b[l].data(),
                            grads.bias_grads[l].data(), net.biases[l].size(), state, lr, c1, c2);
    }
}

}  // namespace advids

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "advids/error.hpp"
#include "advids/matrix.hpp"
#include "advids/rng.hpp"

namespace advids {

/// Fully connected feed-forward classifier. Hidden layers use ReLU, the output
/// layer log-softmax, so rows of the final activation are log-probabilities.
///
/// weights[l] has shape (layer_sizes[l+1] x layer_sizes[l]), biases[l] has
/// length layer_sizes[l+1].
struct dense_net {
    std::vector<std::size_t> layer_sizes;
    std::vector<matrix> weights;
    std::vector<std::vector<double>> biases;

    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t output_dim() const { return layer_sizes.back(); }
    std::size_t layer_count() const { return weights.size(); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l)
            n += weights[l].data.size() + biases[l].size();
        return n;
    }
};

/// Weights drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
/// Deterministic for a fixed seed.
inline dense_net init_network(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2)
        throw config_error("init_network: need at least input and output layer sizes");
    for (const std::size_t s : layer_sizes)
        if (s < 1) throw config_error("init_network: layer sizes must be positive");

    dense_net net;
    net.layer_sizes = layer_sizes;
    rng r(derive_seed(seed, "weights"));
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const std::size_t fan_in = layer_sizes[l];
        const std::size_t fan_out = layer_sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        matrix w(fan_out, fan_in);
        for (double& v : w.data) v = r.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(fan_out, 0.0);
    }
    return net;
}

/// Everything backward() needs: the input batch plus per-layer pre- and
/// post-activations. post_activations.back() holds the log-probabilities.
struct forward_trace {
    matrix input;
    std::vector<matrix> pre_activations;
    std::vector<matrix> post_activations;

    const matrix& log_probs() const { return post_activations.back(); }
};

inline forward_trace forward(const dense_net& net, const matrix& X) {
    if (X.cols != net.input_dim())
        throw shape_error("forward: input has " + std::to_string(X.cols) +
                          " columns, net expects " + std::to_string(net.input_dim()));
    if (!X.all_finite()) throw numeric_error("forward: non-finite input");

    forward_trace trace;
    trace.input = X;
    const matrix* a = &trace.input;
    const std::size_t layers = net.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        const matrix& w = net.weights[l];
        const std::vector<double>& b = net.biases[l];
        matrix z(X.rows, w.rows);
        for (std::size_t i = 0; i < X.rows; ++i) {
            const double* ai = a->row_ptr(i);
            for (std::size_t o = 0; o < w.rows; ++o) {
                const double* wo = w.row_ptr(o);
                double acc = b[o];
                for (std::size_t c = 0; c < w.cols; ++c) acc += wo[c] * ai[c];
                z(i, o) = acc;
            }
        }
        matrix act(z.rows, z.cols);
        if (l + 1 < layers) {
            for (std::size_t k = 0; k < z.data.size(); ++k)
                act.data[k] = z.data[k] > 0.0 ? z.data[k] : 0.0;
        } else {
            // log-softmax with max subtraction
            for (std::size_t i = 0; i < z.rows; ++i) {
                double zmax = z(i, 0);
                for (std::size_t o = 1; o < z.cols; ++o) zmax = std::max(zmax, z(i, o));
                double sum = 0.0;
                for (std::size_t o = 0; o < z.cols; ++o) sum += std::exp(z(i, o) - zmax);
                const double lse = zmax + std::log(sum);
                for (std::size_t o = 0; o < z.cols; ++o) act(i, o) = z(i, o) - lse;
            }
        }
        trace.pre_activations.push_back(std::move(z));
        trace.post_activations.push_back(std::move(act));
        a = &trace.post_activations.back();
    }
    return trace;
}

inline void check_labels(const matrix& log_probs, const std::vector<int>& labels) {
    if (labels.size() != log_probs.rows)
        throw shape_error("labels: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(log_probs.rows) + " rows");
    for (const int y : labels)
        if (y != 0 && y != 1) throw data_error("labels must be 0 or 1, got " + std::to_string(y));
}

/// Negative log-likelihood of the true class per row.
inline std::vector<double> per_row_nll(const matrix& log_probs, const std::vector<int>& labels) {
    check_labels(log_probs, labels);
    std::vector<double> out(log_probs.rows);
    for (std::size_t i = 0; i < log_probs.rows; ++i)
        out[i] = -log_probs(i, static_cast<std::size_t>(labels[i]));
    return out;
}

/// Mean negative log-likelihood over the batch.
inline double loss_nll(const matrix& log_probs, const std::vector<int>& labels) {
    const std::vector<double> nll = per_row_nll(log_probs, labels);
    double sum = 0.0;
    for (const double v : nll) sum += v;
    return sum / static_cast<double>(nll.size());
}

struct gradients {
    std::vector<matrix> weight_grads;
    std::vector<std::vector<double>> bias_grads;
    matrix input_grads;  // d(mean NLL)/dX, batch x input_dim

    bool all_finite() const {
        if (!input_grads.all_finite()) return false;
        for (const matrix& g : weight_grads)
            if (!g.all_finite()) return false;
        for (const std::vector<double>& g : bias_grads)
            for (const double v : g)
                if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Exact gradients of the mean NLL with respect to every parameter and every
/// input coordinate. The trace must come from forward() on the same net.
inline gradients backward(const dense_net& net, const forward_trace& trace,
                          const std::vector<int>& labels) {
    const std::size_t layers = net.layer_count();
    if (trace.pre_activations.size() != layers || trace.post_activations.size() != layers)
        throw shape_error("backward: trace does not match net layer count");
    if (trace.input.cols != net.input_dim())
        throw shape_error("backward: trace input width does not match net");
    for (std::size_t l = 0; l < layers; ++l)
        if (trace.pre_activations[l].cols != net.weights[l].rows)
            throw shape_error("backward: trace layer " + std::to_string(l) +
                              " width does not match net");
    const matrix& log_probs = trace.log_probs();
    check_labels(log_probs, labels);

    const std::size_t batch = trace.input.rows;
    const double inv_batch = 1.0 / static_cast<double>(batch);

    gradients grads;
    grads.weight_grads.resize(layers);
    grads.bias_grads.resize(layers);

    // d(mean NLL)/dz at the output: (softmax - onehot) / batch
    matrix delta(batch, net.output_dim());
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t o = 0; o < net.output_dim(); ++o) {
            const double soft = std::exp(log_probs(i, o));
            const double one = (static_cast<std::size_t>(labels[i]) == o) ? 1.0 : 0.0;
            delta(i, o) = (soft - one) * inv_batch;
        }

    for (std::size_t li = layers; li-- > 0;) {
        const matrix& w = net.weights[li];
        const matrix& in_act = (li == 0) ? trace.input : trace.post_activations[li - 1];

        matrix wg(w.rows, w.cols);
        std::vector<double> bg(w.rows, 0.0);
        for (std::size_t i = 0; i < batch; ++i) {
            const double* di = delta.row_ptr(i);
            const double* ai = in_act.row_ptr(i);
            for (std::size_t o = 0; o < w.rows; ++o) {
                const double d = di[o];
                bg[o] += d;
                double* wgo = wg.row_ptr(o);
                for (std::size_t c = 0; c < w.cols; ++c) wgo[c] += d * ai[c];
            }
        }
        grads.weight_grads[li] = std::move(wg);
        grads.bias_grads[li] = std::move(bg);

        // propagate to the layer input
        matrix prev(batch, w.cols);
        for (std::size_t i = 0; i < batch; ++i) {
            const double* di = delta.row_ptr(i);
            double* pi = prev.row_ptr(i);
            for (std::size_t o = 0; o < w.rows; ++o) {
                const double d = di[o];
                if (d == 0.0) continue;
                const double* wo = w.row_ptr(o);
                for (std::size_t c = 0; c < w.cols; ++c) pi[c] += d * wo[c];
            }
        }
        if (li > 0) {
            // ReLU subgradient, 0 at 0
            const matrix& z = trace.pre_activations[li - 1];
            for (std::size_t k = 0; k < prev.data.size(); ++k)
                if (z.data[k] <= 0.0) prev.data[k] = 0.0;
        }
        delta = std::move(prev);
    }
    grads.input_grads = std::move(delta);
    return grads;
}

}  // namespace advids

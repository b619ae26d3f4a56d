#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "advids/error.hpp"
#include "advids/matrix.hpp"
#include "advids/net.hpp"
#include "advids/rng.hpp"

namespace advids {

enum class attack_method { natural, dfgsm, rfgsm, bga, bca };

inline const char* to_string(attack_method m) {
    switch (m) {
        case attack_method::natural: return "natural";
        case attack_method::dfgsm: return "dfgsm";
        case attack_method::rfgsm: return "rfgsm";
        case attack_method::bga: return "bga";
        case attack_method::bca: return "bca";
    }
    return "?";
}

inline attack_method parse_attack_method(const std::string& name) {
    if (name == "natural") return attack_method::natural;
    if (name == "dfgsm") return attack_method::dfgsm;
    if (name == "rfgsm") return attack_method::rfgsm;
    if (name == "bga") return attack_method::bga;
    if (name == "bca") return attack_method::bca;
    throw config_error("unknown attack method '" + name + "'");
}

/// Inner-maximizer settings. epsilon is the L-infinity budget around each
/// original sample, step_size the per-iteration step, iterations the step
/// count s. lower/upper_bounds describe the feasible box per feature.
struct attack_config {
    attack_method method = attack_method::natural;
    double epsilon = 0.1;
    double step_size = 0.01;
    int iterations = 50;
    std::vector<double> lower_bounds;
    std::vector<double> upper_bounds;
    std::uint64_t seed = 0;

    void validate(std::size_t n_features) const {
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
            throw config_error("attack_config: epsilon must be finite and >= 0");
        if (!(step_size > 0.0)) throw config_error("attack_config: step_size must be > 0");
        if (iterations < 1) throw config_error("attack_config: iterations must be >= 1");
        if (lower_bounds.size() != n_features || upper_bounds.size() != n_features)
            throw shape_error("attack_config: bounds length does not match feature count");
        for (std::size_t j = 0; j < n_features; ++j)
            if (!(lower_bounds[j] <= upper_bounds[j]))
                throw config_error("attack_config: lower bound above upper bound at feature " +
                                   std::to_string(j));
    }
};

/// Box bounds covering the unit cube, the feasible set for normalized features.
inline void set_unit_bounds(attack_config& cfg, std::size_t n_features) {
    cfg.lower_bounds.assign(n_features, 0.0);
    cfg.upper_bounds.assign(n_features, 1.0);
}

struct attack_result {
    matrix adversarial;         // best-loss candidate per row
    double natural_loss = 0.0;  // mean per-row NLL on the original batch
    double adversarial_loss = 0.0;
    std::vector<bool> changed;
    int iterate_count = 0;
};

inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// BGA selection rule: feature j steps iff |g_j| >= ||g||_2 / sqrt(m).
inline std::vector<bool> bga_step_mask(const std::vector<double>& g) {
    double sq = 0.0;
    for (const double v : g) sq += v * v;
    const double threshold = std::sqrt(sq) / std::sqrt(static_cast<double>(g.size()));
    std::vector<bool> mask(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) mask[j] = std::abs(g[j]) >= threshold;
    return mask;
}

/// BCA selection rule: the feature with the largest |g_j|, lowest index on ties.
inline std::size_t bca_pick(const std::vector<double>& g) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < g.size(); ++j)
        if (std::abs(g[j]) > std::abs(g[best])) best = j;
    return best;
}

namespace detail {

/// Project onto the epsilon ball around the original row intersected with the
/// bounds box. Both are boxes, so sequential clipping is the exact projection.
inline void project_row(double* x, const double* x0, std::size_t m, const attack_config& cfg) {
    for (std::size_t j = 0; j < m; ++j) {
        double v = std::min(std::max(x[j], x0[j] - cfg.epsilon), x0[j] + cfg.epsilon);
        v = std::min(std::max(v, cfg.lower_bounds[j]), cfg.upper_bounds[j]);
        x[j] = v;
    }
}

struct best_tracker {
    matrix best;
    std::vector<double> best_nll;

    best_tracker(const matrix& x0, std::vector<double> nll0)
        : best(x0), best_nll(std::move(nll0)) {}

    void offer(const matrix& candidate, const std::vector<double>& nll) {
        for (std::size_t i = 0; i < best.rows; ++i)
            if (nll[i] > best_nll[i]) {
                best_nll[i] = nll[i];
                for (std::size_t c = 0; c < best.cols; ++c) best(i, c) = candidate(i, c);
            }
    }

    double mean_nll() const {
        double s = 0.0;
        for (const double v : best_nll) s += v;
        return s / static_cast<double>(best_nll.size());
    }
};

inline void require_attack_labels(const std::vector<int>& y) {
    for (const int v : y)
        if (v != 1) throw data_error("inner maximizer: batch must contain attack rows only");
}

/// Shared multi-step ascent. Every iterate plus the original is a candidate;
/// the per-row best-loss candidate is returned.
inline attack_result ascend(const dense_net& net, const matrix& x, const std::vector<int>& y,
                            const attack_config& cfg) {
    cfg.validate(x.cols);
    if (x.cols != net.input_dim()) throw shape_error("attack: batch width does not match net");
    require_attack_labels(y);

    const std::size_t m = x.cols;
    attack_result res;
    res.iterate_count = cfg.iterations;

    const std::vector<double> nll0 = per_row_nll(forward(net, x).log_probs(), y);
    double nat = 0.0;
    for (const double v : nll0) nat += v;
    res.natural_loss = nat / static_cast<double>(nll0.size());

    best_tracker tracker(x, nll0);

    matrix cur = x;
    if (cfg.method == attack_method::rfgsm) {
        // uniform start inside the epsilon ball, one stream per row so results
        // do not depend on batch processing order
        for (std::size_t i = 0; i < x.rows; ++i) {
            rng row_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
            double* ci = cur.row_ptr(i);
            const double* xi = x.row_ptr(i);
            for (std::size_t j = 0; j < m; ++j)
                ci[j] = xi[j] + row_rng.uniform(-cfg.epsilon, cfg.epsilon);
            project_row(ci, xi, m, cfg);
        }
        tracker.offer(cur, per_row_nll(forward(net, cur).log_probs(), y));
    }

    for (int t = 0; t < cfg.iterations; ++t) {
        const forward_trace trace = forward(net, cur);
        const gradients grads = backward(net, trace, y);
        for (std::size_t i = 0; i < x.rows; ++i) {
            const std::vector<double> g = grads.input_grads.row(i);
            double* ci = cur.row_ptr(i);
            switch (cfg.method) {
                case attack_method::dfgsm:
                case attack_method::rfgsm:
                    for (std::size_t j = 0; j < m; ++j) ci[j] += cfg.step_size * sign0(g[j]);
                    break;
                case attack_method::bga: {
                    const std::vector<bool> mask = bga_step_mask(g);
                    for (std::size_t j = 0; j < m; ++j)
                        if (mask[j]) ci[j] += cfg.step_size * sign0(g[j]);
                    break;
                }
                case attack_method::bca: {
                    const std::size_t j = bca_pick(g);
                    ci[j] += cfg.step_size * sign0(g[j]);
                    break;
                }
                case attack_method::natural:
                    break;
            }
            project_row(ci, x.row_ptr(i), m, cfg);
        }
        tracker.offer(cur, per_row_nll(forward(net, cur).log_probs(), y));
    }

    res.adversarial = std::move(tracker.best);
    res.adversarial_loss = tracker.mean_nll();
    res.changed.resize(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        bool diff = false;
        for (std::size_t c = 0; c < m && !diff; ++c) diff = res.adversarial(i, c) != x(i, c);
        res.changed[i] = diff;
    }
    return res;
}

}  // namespace detail

/// Identity "attack": the clean batch is returned unchanged.
inline attack_result natural_attack(const dense_net& net, const matrix& x,
                                    const std::vector<int>& y) {
    attack_result res;
    res.adversarial = x;
    const std::vector<double> nll = per_row_nll(forward(net, x).log_probs(), y);
    double s = 0.0;
    for (const double v : nll) s += v;
    res.natural_loss = s / static_cast<double>(nll.size());
    res.adversarial_loss = res.natural_loss;
    res.changed.assign(x.rows, false);
    res.iterate_count = 0;
    return res;
}

/// Multi-step FGSM, deterministic start.
inline attack_result dfgsm_s(const dense_net& net, const matrix& x, const std::vector<int>& y,
                             const attack_config& cfg) {
    if (cfg.method != attack_method::dfgsm) throw config_error("dfgsm_s: cfg.method mismatch");
    return detail::ascend(net, x, y, cfg);
}

/// Multi-step FGSM from a random start inside the epsilon ball.
inline attack_result rfgsm_s(const dense_net& net, const matrix& x, const std::vector<int>& y,
                             const attack_config& cfg) {
    if (cfg.method != attack_method::rfgsm) throw config_error("rfgsm_s: cfg.method mismatch");
    return detail::ascend(net, x, y, cfg);
}

/// Thresholded multi-coordinate ascent: every feature whose gradient magnitude
/// reaches ||g||_2/sqrt(m) steps each iteration.
inline attack_result bga_s(const dense_net& net, const matrix& x, const std::vector<int>& y,
                           const attack_config& cfg) {
    if (cfg.method != attack_method::bga) throw config_error("bga_s: cfg.method mismatch");
    return detail::ascend(net, x, y, cfg);
}

/// Single-coordinate ascent: only the feature with the largest |gradient|
/// steps each iteration.
inline attack_result bca_s(const dense_net& net, const matrix& x, const std::vector<int>& y,
                           const attack_config& cfg) {
    if (cfg.method != attack_method::bca) throw config_error("bca_s: cfg.method mismatch");
    return detail::ascend(net, x, y, cfg);
}

/// Dispatch on cfg.method.
inline attack_result inner_maximize(const dense_net& net, const matrix& attack_batch,
                                    const std::vector<int>& labels, const attack_config& cfg) {
    switch (cfg.method) {
        case attack_method::natural: return natural_attack(net, attack_batch, labels);
        case attack_method::dfgsm: return dfgsm_s(net, attack_batch, labels, cfg);
        case attack_method::rfgsm: return rfgsm_s(net, attack_batch, labels, cfg);
        case attack_method::bga: return bga_s(net, attack_batch, labels, cfg);
        case attack_method::bca: return bca_s(net, attack_batch, labels, cfg);
    }
    throw config_error("inner_maximize: unknown method");
}

}  // namespace advids

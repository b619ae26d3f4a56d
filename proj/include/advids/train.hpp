#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "advids/adam.hpp"
#include "advids/attack.hpp"
#include "advids/data.hpp"
#include "advids/net.hpp"
#include "advids/rng.hpp"

namespace advids {

struct train_config {
    int epochs = 100;
    std::size_t batch_size = 100;
    double learning_rate = 0.01;
    attack_config attack;
    std::uint64_t seed = 0;
    int convergence_patience = 10;
    bool augment = false;  // keep the clean attack rows next to their adversarial copies

    void validate() const {
        if (epochs < 1) throw config_error("train_config: epochs must be >= 1");
        if (batch_size < 1) throw config_error("train_config: batch_size must be >= 1");
        if (!(learning_rate > 0.0)) throw config_error("train_config: learning_rate must be > 0");
        if (convergence_patience < 1)
            throw config_error("train_config: convergence_patience must be >= 1");
    }
};

struct epoch_stats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    std::uint64_t distinct_adversarials = 0;  // cumulative over all attack train rows
    std::uint64_t inner_calls = 0;            // maximizer invocations this epoch
};

struct train_history {
    std::vector<epoch_stats> epochs;
    int final_epoch = -1;
    std::size_t n_attack_train = 0;
    std::uint64_t adam_steps = 0;
    std::uint64_t benign_rows_perturbed = 0;  // runtime self-check, must stay 0
    bool early_stopped = false;
};

/// Quantized fingerprint of one sample at 1e-6 resolution per coordinate, so
/// "distinct variant" is well defined for continuous features.
inline std::uint64_t variant_fingerprint(const double* row, std::size_t m) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t j = 0; j < m; ++j) {
        const std::int64_t q = static_cast<std::int64_t>(std::llround(row[j] * 1e6));
        std::uint64_t v = static_cast<std::uint64_t>(q);
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v & 0xffull);
            h *= 1099511628211ull;
            v >>= 8;
        }
    }
    return h;
}

/// Argmax prediction; the first class wins exact ties.
inline int predict_row(const matrix& log_probs, std::size_t i) {
    int best = 0;
    for (std::size_t o = 1; o < log_probs.cols; ++o)
        if (log_probs(i, o) > log_probs(i, static_cast<std::size_t>(best))) best = static_cast<int>(o);
    return best;
}

/// Adversarial (or natural) training: per epoch, shuffle the train rows,
/// slice batches, replace each batch's attack rows with the inner maximizer's
/// output (natural training skips the maximizer), and take one optimizer step
/// per batch. Early-stops when validation loss stops improving.
inline std::pair<dense_net, train_history> train_model(const dataset& ds, const dense_net& init,
                                                       const train_config& cfg) {
    cfg.validate();
    ds.validate();
    if (init.input_dim() != ds.n_features())
        throw shape_error("train_model: net input width does not match dataset");

    const std::vector<std::size_t> train_rows = ds.rows_with_tag(split_tag::train);
    const std::vector<std::size_t> val_rows = ds.rows_with_tag(split_tag::val);
    if (train_rows.empty()) throw data_error("train_model: empty train split");
    if (val_rows.empty()) throw data_error("train_model: empty validation split");

    const bool adversarial = cfg.attack.method != attack_method::natural;
    if (adversarial) cfg.attack.validate(ds.n_features());

    dense_net net = init;
    adam_state opt = make_adam_state(net);
    train_history history;

    // one variant set per attack-class train row, keyed by dataset row id
    std::map<std::size_t, std::unordered_set<std::uint64_t>> variants;
    for (const std::size_t i : train_rows)
        if (ds.y[i] == 1) variants[i];
    history.n_attack_train = variants.size();

    const matrix val_X = take_rows(ds.X, val_rows);
    std::vector<int> val_y(val_rows.size());
    for (std::size_t i = 0; i < val_rows.size(); ++i) val_y[i] = ds.y[val_rows[i]];

    const std::uint64_t order_seed = derive_seed(cfg.seed, "order");
    const std::uint64_t attack_seed = derive_seed(cfg.seed, "attack");

    double best_val = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;

    std::vector<std::size_t> order = train_rows;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng shuffle_rng(derive_seed(order_seed, static_cast<std::uint64_t>(epoch)));
        shuffle(order, shuffle_rng);

        epoch_stats stats;
        double loss_sum = 0.0;
        std::size_t rows_seen = 0;

        const std::size_t n_batches = (order.size() + cfg.batch_size - 1) / cfg.batch_size;
        for (std::size_t b = 0; b < n_batches; ++b) {
            const std::size_t lo = b * cfg.batch_size;
            const std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
            const std::vector<std::size_t> batch_rows(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                                      order.begin() + static_cast<std::ptrdiff_t>(hi));

            matrix Xb = take_rows(ds.X, batch_rows);
            std::vector<int> yb(batch_rows.size());
            std::vector<std::size_t> attack_pos;
            for (std::size_t i = 0; i < batch_rows.size(); ++i) {
                yb[i] = ds.y[batch_rows[i]];
                if (yb[i] == 1) attack_pos.push_back(i);
            }

            if (adversarial && !attack_pos.empty()) {
                ++stats.inner_calls;
                matrix Xa(attack_pos.size(), ds.n_features());
                for (std::size_t a = 0; a < attack_pos.size(); ++a)
                    for (std::size_t j = 0; j < ds.n_features(); ++j)
                        Xa(a, j) = Xb(attack_pos[a], j);

                attack_config atk = cfg.attack;
                atk.seed = derive_seed(derive_seed(attack_seed, static_cast<std::uint64_t>(epoch)),
                                       static_cast<std::uint64_t>(b));
                const attack_result adv =
                    inner_maximize(net, Xa, std::vector<int>(attack_pos.size(), 1), atk);

                for (std::size_t a = 0; a < attack_pos.size(); ++a)
                    variants[batch_rows[attack_pos[a]]].insert(
                        variant_fingerprint(adv.adversarial.row_ptr(a), ds.n_features()));

                if (cfg.augment) {
                    matrix grown(Xb.rows + attack_pos.size(), Xb.cols);
                    for (std::size_t i = 0; i < Xb.rows; ++i)
                        for (std::size_t j = 0; j < Xb.cols; ++j) grown(i, j) = Xb(i, j);
                    for (std::size_t a = 0; a < attack_pos.size(); ++a) {
                        for (std::size_t j = 0; j < Xb.cols; ++j)
                            grown(Xb.rows + a, j) = adv.adversarial(a, j);
                        yb.push_back(1);
                    }
                    Xb = std::move(grown);
                } else {
                    for (std::size_t a = 0; a < attack_pos.size(); ++a)
                        for (std::size_t j = 0; j < Xb.cols; ++j)
                            Xb(attack_pos[a], j) = adv.adversarial(a, j);
                }
            } else if (!adversarial) {
                // natural training: the clean row is the epoch's only variant
                for (const std::size_t p : attack_pos)
                    variants[batch_rows[p]].insert(
                        variant_fingerprint(Xb.row_ptr(p), ds.n_features()));
            }

            // benign rows must have survived untouched
            for (std::size_t i = 0; i < batch_rows.size(); ++i) {
                if (yb[i] == 1) continue;
                for (std::size_t j = 0; j < Xb.cols; ++j)
                    if (Xb(i, j) != ds.X(batch_rows[i], j)) {
                        ++history.benign_rows_perturbed;
                        break;
                    }
            }

            const forward_trace trace = forward(net, Xb);
            const double batch_loss = loss_nll(trace.log_probs(), yb);
            if (!std::isfinite(batch_loss))
                throw divergence_error(
                    "training diverged: non-finite loss at epoch " + std::to_string(epoch), epoch);
            loss_sum += batch_loss * static_cast<double>(Xb.rows);
            rows_seen += Xb.rows;

            const gradients grads = backward(net, trace, yb);
            adam_step(net, grads, opt, cfg.learning_rate);
            ++history.adam_steps;
        }

        stats.train_loss = loss_sum / static_cast<double>(rows_seen);

        const matrix val_lp = forward(net, val_X).log_probs();
        stats.val_loss = loss_nll(val_lp, val_y);
        if (!std::isfinite(stats.val_loss))
            throw divergence_error(
                "training diverged: non-finite validation loss at epoch " + std::to_string(epoch),
                epoch);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < val_rows.size(); ++i)
            if (predict_row(val_lp, i) == val_y[i]) ++correct;
        stats.val_accuracy = static_cast<double>(correct) / static_cast<double>(val_rows.size());

        std::uint64_t distinct = 0;
        for (const auto& [row, set] : variants) {
            (void)row;
            distinct += set.size();
        }
        stats.distinct_adversarials = distinct;

        history.epochs.push_back(stats);
        history.final_epoch = epoch;

        if (stats.val_loss < best_val - 1e-12) {
            best_val = stats.val_loss;
            stale_epochs = 0;
        } else if (++stale_epochs >= cfg.convergence_patience) {
            history.early_stopped = true;
            break;
        }
    }

    return {std::move(net), std::move(history)};
}

struct trained_model {
    dense_net net;
    train_history history;
};

inline const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names = {"natural", "dfgsm", "rfgsm", "bga", "bca"};
    return names;
}

/// The five models of the study: one natural baseline plus one per attack
/// method, all from the same initial parameters and seed.
inline std::map<std::string, trained_model> train_all_five(const dataset& ds,
                                                           const dense_net& init,
                                                           const train_config& base_cfg) {
    std::map<std::string, trained_model> out;
    for (const std::string& name : model_names()) {
        train_config cfg = base_cfg;
        cfg.attack.method = parse_attack_method(name);
        auto [net, history] = train_model(ds, init, cfg);
        out.emplace(name, trained_model{std::move(net), std::move(history)});
    }
    return out;
}

}  // namespace advids

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "advids/attack.hpp"
#include "advids/data.hpp"
#include "advids/net.hpp"
#include "advids/train.hpp"

namespace advids {

/// Confusion counts and derived ratios. Attack (label 1) is the positive
/// class. Ratios are fractions in [0,1]; multiply by 100 when reporting.
struct eval_report {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
    double evasion_rate = 0.0;  // identical to fnr; named for attack-set reports
    double auc = 0.0;
    bool has_auc = false;
};

/// Core evaluation on an explicit matrix + labels.
inline eval_report evaluate_matrix(const dense_net& net, const matrix& X,
                                   const std::vector<int>& y) {
    if (X.rows == 0) throw data_error("evaluate: empty split");
    const matrix lp = forward(net, X).log_probs();
    check_labels(lp, y);

    eval_report rep;
    for (std::size_t i = 0; i < X.rows; ++i) {
        const int pred = predict_row(lp, i);
        if (y[i] == 1)
            pred == 1 ? ++rep.tp : ++rep.fn;
        else
            pred == 1 ? ++rep.fp : ++rep.tn;
    }
    const double total = static_cast<double>(X.rows);
    rep.accuracy = static_cast<double>(rep.tp + rep.tn) / total;
    rep.fpr = (rep.fp + rep.tn > 0)
                  ? static_cast<double>(rep.fp) / static_cast<double>(rep.fp + rep.tn)
                  : 0.0;
    rep.fnr = (rep.fn + rep.tp > 0)
                  ? static_cast<double>(rep.fn) / static_cast<double>(rep.fn + rep.tp)
                  : 0.0;
    rep.evasion_rate = rep.fnr;

    // AUC by rank statistic over the attack-class log-probability, average
    // ranks on ties; defined only when both classes appear
    if (rep.tp + rep.fn > 0 && rep.fp + rep.tn > 0) {
        std::vector<std::pair<double, int>> scored(X.rows);
        for (std::size_t i = 0; i < X.rows; ++i) scored[i] = {lp(i, 1), y[i]};
        std::sort(scored.begin(), scored.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        double rank_sum = 0.0;
        std::size_t i = 0;
        while (i < X.rows) {
            std::size_t j = i;
            while (j < X.rows && scored[j].first == scored[i].first) ++j;
            const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
            for (std::size_t k = i; k < j; ++k)
                if (scored[k].second == 1) rank_sum += avg_rank;
            i = j;
        }
        const double n_pos = static_cast<double>(rep.tp + rep.fn);
        const double n_neg = static_cast<double>(rep.fp + rep.tn);
        rep.auc = (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
        rep.has_auc = true;
    }
    return rep;
}

/// Evaluation restricted to one split of a dataset.
inline eval_report evaluate(const dense_net& net, const dataset& ds, split_tag tag) {
    const std::vector<std::size_t> rows = ds.rows_with_tag(tag);
    if (rows.empty()) throw data_error("evaluate: empty split");
    std::vector<int> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) y[i] = ds.y[rows[i]];
    return evaluate_matrix(net, take_rows(ds.X, rows), y);
}

/// Perturb every attack row with the configured method, then report the
/// fraction (as a percent) classified benign.
inline double evasion_rate_percent(const dense_net& net, const matrix& X_attack,
                                   const attack_config& cfg) {
    if (X_attack.rows == 0) throw data_error("evasion_rate: empty attack set");
    const std::vector<int> y(X_attack.rows, 1);
    const attack_result res = (cfg.method == attack_method::natural)
                                  ? natural_attack(net, X_attack, y)
                                  : inner_maximize(net, X_attack, y, cfg);
    const eval_report rep = evaluate_matrix(net, res.adversarial, y);
    return 100.0 * rep.fnr;
}

/// Average number of distinct adversarial variants per original attack-class
/// train sample, cumulative over the recorded epochs.
inline double covering_number(const train_history& history, std::size_t n_attack_train) {
    if (history.epochs.empty()) throw data_error("covering_number: empty history");
    if (n_attack_train == 0) throw data_error("covering_number: no attack train rows");
    return static_cast<double>(history.epochs.back().distinct_adversarials) /
           static_cast<double>(n_attack_train);
}

inline double covering_number(const train_history& history) {
    return covering_number(history, history.n_attack_train);
}

inline const std::vector<std::string>& attack_names() {
    static const std::vector<std::string> names = {"dfgsm", "rfgsm", "bga", "bca"};
    return names;
}

/// Evasion-rate grid: one row per trained model (canonical five), one column
/// per attack method (canonical four). Cells are percentages.
struct evasion_matrix {
    std::vector<std::string> model_names;
    std::vector<std::string> attack_names;
    matrix cells;
};

inline evasion_matrix cross_matrix(const std::map<std::string, dense_net>& models,
                                   const attack_config& base, const matrix& X_attack_test) {
    std::string missing;
    for (const std::string& name : model_names())
        if (models.find(name) == models.end()) missing += (missing.empty() ? "" : ", ") + name;
    if (!missing.empty()) throw data_error("cross_matrix: missing models: " + missing);

    evasion_matrix out;
    out.model_names = model_names();
    out.attack_names = attack_names();
    out.cells = matrix(out.model_names.size(), out.attack_names.size());
    for (std::size_t i = 0; i < out.model_names.size(); ++i) {
        const dense_net& net = models.at(out.model_names[i]);
        for (std::size_t j = 0; j < out.attack_names.size(); ++j) {
            attack_config cfg = base;
            cfg.method = parse_attack_method(out.attack_names[j]);
            // one stream per attack method; identical models then see
            // identical perturbation draws and produce identical rows
            cfg.seed = derive_seed(base.seed, out.attack_names[j]);
            out.cells(i, j) = evasion_rate_percent(net, X_attack_test, cfg);
        }
    }
    return out;
}

}  // namespace advids

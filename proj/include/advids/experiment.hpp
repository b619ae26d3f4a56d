#pragma once

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "advids/attack.hpp"
#include "advids/data.hpp"
#include "advids/error.hpp"
#include "advids/io.hpp"
#include "advids/metrics.hpp"
#include "advids/net.hpp"
#include "advids/pca.hpp"
#include "advids/rng.hpp"
#include "advids/train.hpp"

namespace advids {

/// Everything one end-to-end run needs: data source, feature pipeline,
/// training setup, and the single root seed all randomness fans out from.
struct experiment_config {
    // source: a CSV of flows, or the built-in synthetic generator when empty
    std::string csv_path;
    std::string label_column = "label";
    std::string positive_label = "1";
    categorical_encoding encoding = categorical_encoding::ordinal;
    synth_config synth;

    // feature pipeline
    std::size_t top_features = 0;           // 0 keeps every column
    std::vector<std::string> feature_list;  // explicit names override top_features
    bool use_pca = false;
    double pca_threshold = 0.95;

    // splits
    double train_fraction = 0.6;
    double val_fraction = 0.2;

    // model and training; train.seed / train.attack.seed are overwritten by
    // the root-seed fan-out so every stage is pinned to `seed` alone
    std::vector<std::size_t> hidden_layers = {16};
    train_config train;

    std::uint64_t seed = 0;
    std::string out_dir = "out";

    void validate() const {
        if (hidden_layers.empty()) throw config_error("experiment: no hidden layers");
        if (!(pca_threshold > 0.0) || pca_threshold > 1.0)
            throw config_error("experiment: pca threshold must be in (0, 1]");
        if (out_dir.empty()) throw config_error("experiment: empty output directory");
    }
};

/// Defended-detector baseline: wide funnel net, batch 100, 50 inner steps.
inline experiment_config preset_experiment1() {
    experiment_config cfg;
    cfg.hidden_layers = {300, 100, 40};
    cfg.train.epochs = 100;
    cfg.train.batch_size = 100;
    cfg.train.learning_rate = 0.01;
    cfg.train.attack.iterations = 50;
    cfg.use_pca = false;
    return cfg;
}

/// Projection variant: uniform 200-wide net, small batches, PCA at 0.95.
inline experiment_config preset_experiment2() {
    experiment_config cfg;
    cfg.hidden_layers = {200, 200, 200};
    cfg.train.epochs = 150;
    cfg.train.batch_size = 8;
    cfg.train.learning_rate = 0.001;
    cfg.train.attack.iterations = 50;
    cfg.use_pca = true;
    cfg.pca_threshold = 0.95;
    return cfg;
}

inline experiment_config preset_by_name(const std::string& name) {
    if (name == "experiment1") return preset_experiment1();
    if (name == "experiment2") return preset_experiment2();
    throw config_error("unknown preset '" + name + "'");
}

struct artifact_paths {
    std::string dataset, normalizer, pca, bounds, manifest, matrix_csv, metrics_csv;

    static artifact_paths in(const std::string& dir) {
        artifact_paths p;
        p.dataset = dir + "/dataset.csv";
        p.normalizer = dir + "/normalizer.csv";
        p.pca = dir + "/pca.csv";
        p.bounds = dir + "/bounds.csv";
        p.manifest = dir + "/manifest.txt";
        p.matrix_csv = dir + "/matrix.csv";
        p.metrics_csv = dir + "/metrics.csv";
        return p;
    }

    static std::string model(const std::string& dir, const std::string& name) {
        return dir + "/model_" + name + ".net";
    }
    static std::string history(const std::string& dir, const std::string& name) {
        return dir + "/history_" + name + ".csv";
    }
    static std::string dump(const std::string& dir, const std::string& method) {
        return dir + "/attacks_" + method + ".csv";
    }
};

namespace detail {

struct derived_seeds {
    std::uint64_t synth, split, init, train, attack, matrix, dump;
};

inline derived_seeds fan_out(std::uint64_t root) {
    derived_seeds s;
    s.synth = derive_seed(root, "synth");
    s.split = derive_seed(root, "split");
    s.init = derive_seed(root, "init");
    s.train = derive_seed(root, "train");
    s.attack = derive_seed(root, "attack");
    s.matrix = derive_seed(root, "matrix");
    s.dump = derive_seed(root, "dump");
    return s;
}

inline std::vector<std::size_t> indices_for_names(const dataset& ds,
                                                  const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    for (const std::string& name : names) {
        const auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), name);
        if (it == ds.feature_names.end())
            throw data_error("feature '" + name + "' not present in the dataset");
        idx.push_back(static_cast<std::size_t>(it - ds.feature_names.begin()));
    }
    if (idx.empty()) throw config_error("feature list is empty");
    return idx;
}

/// Attack box for the prepared feature space: the unit box in raw space, or
/// the per-component envelope of the projected training attack rows when the
/// pipeline ends in a projection.
inline void attack_box_from_rows(const matrix& X, const std::vector<std::size_t>& rows,
                                 std::vector<double>& lo, std::vector<double>& hi) {
    if (rows.empty()) throw data_error("no training attack rows to derive attack bounds from");
    lo.assign(X.cols, 0.0);
    hi.assign(X.cols, 0.0);
    for (std::size_t j = 0; j < X.cols; ++j) {
        double mn = X(rows[0], j), mx = X(rows[0], j);
        for (const std::size_t i : rows) {
            mn = std::min(mn, X(i, j));
            mx = std::max(mx, X(i, j));
        }
        lo[j] = mn;
        hi[j] = mx;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------- prep

/// Source → split → feature selection → normalization → optional projection.
/// Writes dataset.csv, normalizer.csv, bounds.csv, manifest.txt (and pca.csv
/// when projecting) into cfg.out_dir, and returns the prepared dataset.
inline dataset run_prep(const experiment_config& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    const detail::derived_seeds seeds = detail::fan_out(cfg.seed);
    const artifact_paths paths = artifact_paths::in(cfg.out_dir);

    dataset ds;
    if (cfg.csv_path.empty()) {
        synth_config sc = cfg.synth;
        sc.seed = seeds.synth;
        ds = synth_generate(sc);
        log << "prep: generated " << ds.n_rows() << " synthetic rows, " << ds.n_features()
            << " features\n";
    } else {
        ds = load_csv(cfg.csv_path, cfg.label_column, cfg.positive_label, cfg.encoding);
        log << "prep: loaded " << ds.n_rows() << " rows, " << ds.n_features() << " features from "
            << cfg.csv_path << "\n";
    }
    const std::size_t features_in = ds.n_features();

    ds = split_dataset(ds, cfg.train_fraction, cfg.val_fraction, seeds.split);

    if (!cfg.feature_list.empty()) {
        ds = select_features(ds, detail::indices_for_names(ds, cfg.feature_list));
        log << "prep: kept " << ds.n_features() << " listed features\n";
    } else if (cfg.top_features > 0 && cfg.top_features < ds.n_features()) {
        ds = select_features(ds, rank_features(ds, cfg.top_features));
        log << "prep: kept top " << ds.n_features() << " features by information gain\n";
    }

    const normalization_model norm = fit_normalizer(ds);
    ds = apply_normalizer(norm, ds);
    save_normalizer(norm, ds.feature_names, paths.normalizer);

    std::size_t pca_k = 0;
    std::vector<double> lo, hi;
    if (cfg.use_pca) {
        const std::vector<std::size_t> train_rows = ds.rows_with_tag(split_tag::train);
        const pca_model model = fit_pca(take_rows(ds.X, train_rows));
        pca_k = select_components(model, cfg.pca_threshold);
        save_pca(model, paths.pca);

        dataset projected;
        projected.X = pca_transform(model, ds.X, pca_k);
        projected.y = ds.y;
        projected.split = ds.split;
        projected.normalized = false;
        for (std::size_t j = 0; j < pca_k; ++j)
            projected.feature_names.push_back("pc" + std::to_string(j));
        ds = std::move(projected);

        detail::attack_box_from_rows(ds.X, ds.rows_with(split_tag::train, 1), lo, hi);
        log << "prep: projected onto " << pca_k << " components\n";
    } else {
        lo.assign(ds.n_features(), 0.0);
        hi.assign(ds.n_features(), 1.0);
    }

    ds.validate();
    save_dataset(ds, paths.dataset);
    save_min_max(ds.feature_names, lo, hi, paths.bounds);

    std::map<std::string, std::string> manifest;
    manifest["source"] = cfg.csv_path.empty() ? "synth" : cfg.csv_path;
    manifest["seed_root"] = std::to_string(cfg.seed);
    manifest["seed_synth"] = std::to_string(seeds.synth);
    manifest["seed_split"] = std::to_string(seeds.split);
    manifest["seed_init"] = std::to_string(seeds.init);
    manifest["seed_train"] = std::to_string(seeds.train);
    manifest["seed_attack"] = std::to_string(seeds.attack);
    manifest["seed_matrix"] = std::to_string(seeds.matrix);
    manifest["rows_total"] = std::to_string(ds.n_rows());
    manifest["rows_train"] = std::to_string(ds.rows_with_tag(split_tag::train).size());
    manifest["rows_val"] = std::to_string(ds.rows_with_tag(split_tag::val).size());
    manifest["rows_test"] = std::to_string(ds.rows_with_tag(split_tag::test).size());
    manifest["rows_attack_train"] = std::to_string(ds.rows_with(split_tag::train, 1).size());
    manifest["features_in"] = std::to_string(features_in);
    manifest["features_out"] = std::to_string(ds.n_features());
    manifest["pca_k"] = std::to_string(pca_k);
    save_manifest(manifest, paths.manifest);

    log << "prep: train/val/test = " << manifest["rows_train"] << "/" << manifest["rows_val"]
        << "/" << manifest["rows_test"] << ", artifacts in " << cfg.out_dir << "\n";
    return ds;
}

// --------------------------------------------------------------------- train

/// Trains one model with the named inner attack against the prepared dataset
/// in cfg.out_dir; writes its checkpoint and history CSV.
inline trained_model run_train(const experiment_config& cfg, const std::string& method_name,
                               std::ostream& log = std::cout) {
    cfg.validate();
    const attack_method method = parse_attack_method(method_name);
    const detail::derived_seeds seeds = detail::fan_out(cfg.seed);
    const artifact_paths paths = artifact_paths::in(cfg.out_dir);

    const dataset ds = load_dataset(paths.dataset);

    train_config tc = cfg.train;
    tc.attack.method = method;
    load_min_max(paths.bounds, tc.attack.lower_bounds, tc.attack.upper_bounds);
    // one shared train/init/attack seed per experiment: two methods differ
    // only through the attack math, never through a different random stream
    tc.seed = seeds.train;
    tc.attack.seed = seeds.attack;

    std::vector<std::size_t> layer_sizes;
    layer_sizes.push_back(ds.n_features());
    layer_sizes.insert(layer_sizes.end(), cfg.hidden_layers.begin(), cfg.hidden_layers.end());
    layer_sizes.push_back(2);
    const dense_net init = init_network(layer_sizes, seeds.init);

    auto [net, history] = train_model(ds, init, tc);

    save_net(net, artifact_paths::model(cfg.out_dir, method_name));
    save_history(history, artifact_paths::history(cfg.out_dir, method_name));

    const epoch_stats& last = history.epochs.back();
    log << "train[" << method_name << "]: " << history.epochs.size() << " epochs"
        << (history.early_stopped ? " (early stop)" : "") << ", val_acc "
        << format_double(last.val_accuracy) << ", coverage "
        << format_double(covering_number(history)) << "\n";
    return trained_model{std::move(net), std::move(history)};
}

// -------------------------------------------------------------------- matrix

struct matrix_outputs {
    evasion_matrix grid;
    std::vector<model_metrics_row> metrics;
};

/// Loads all five checkpoints and the prepared dataset, evaluates the full
/// evasion grid plus per-model test metrics, and writes both CSV reports.
inline matrix_outputs run_matrix(const experiment_config& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    const detail::derived_seeds seeds = detail::fan_out(cfg.seed);
    const artifact_paths paths = artifact_paths::in(cfg.out_dir);

    const dataset ds = load_dataset(paths.dataset);
    const std::size_t n_attack_train = ds.rows_with(split_tag::train, 1).size();
    const matrix X_attack = take_rows(ds.X, ds.rows_with(split_tag::test, 1));

    std::map<std::string, dense_net> models;
    std::map<std::string, train_history> histories;
    for (const std::string& name : model_names()) {
        models[name] = load_net(artifact_paths::model(cfg.out_dir, name));
        histories[name] = load_history(artifact_paths::history(cfg.out_dir, name));
    }

    attack_config base = cfg.train.attack;
    load_min_max(paths.bounds, base.lower_bounds, base.upper_bounds);
    base.seed = seeds.matrix;

    matrix_outputs out;
    out.grid = cross_matrix(models, base, X_attack);
    for (const std::string& name : model_names()) {
        const eval_report rep = evaluate(models.at(name), ds, split_tag::test);
        model_metrics_row row;
        row.model = name;
        row.accuracy_pct = 100.0 * rep.accuracy;
        row.fpr_pct = 100.0 * rep.fpr;
        row.evasion_pct = 100.0 * rep.fnr;
        row.cn = covering_number(histories.at(name), n_attack_train);
        out.metrics.push_back(row);
    }

    save_matrix_csv(out.grid, paths.matrix_csv);
    save_metrics_csv(out.metrics, paths.metrics_csv);

    log << "evasion rate (%) of each attack against each trained model:\n"
        << render_matrix_table(out.grid) << "\n"
        << "clean test metrics (%) and adversarial coverage per model:\n"
        << render_metrics_table(out.metrics);
    return out;
}

// --------------------------------------------------------------- attack dump

/// Perturbs up to n attack-class test rows against the naturally trained
/// model and writes original/adversarial pairs with their sup-norm distance.
inline std::size_t run_attack_dump(const experiment_config& cfg, const std::string& method_name,
                                   std::size_t n, std::ostream& log = std::cout) {
    cfg.validate();
    const attack_method method = parse_attack_method(method_name);
    const detail::derived_seeds seeds = detail::fan_out(cfg.seed);
    const artifact_paths paths = artifact_paths::in(cfg.out_dir);

    const dataset ds = load_dataset(paths.dataset);
    const dense_net net = load_net(artifact_paths::model(cfg.out_dir, "natural"));

    const std::vector<std::size_t> attack_rows = ds.rows_with(split_tag::test, 1);
    if (attack_rows.empty()) throw data_error("attack-dump: no attack rows in the test split");
    if (n == 0) throw config_error("attack-dump: need n >= 1");
    if (n > attack_rows.size()) {
        log << "attack-dump: only " << attack_rows.size() << " attack test rows available, "
            << "clamping n from " << n << "\n";
        n = attack_rows.size();
    }

    const matrix X = take_rows(ds.X, std::vector<std::size_t>(attack_rows.begin(),
                                                              attack_rows.begin() +
                                                                  static_cast<std::ptrdiff_t>(n)));
    const std::vector<int> y(n, 1);

    attack_config atk = cfg.train.attack;
    atk.method = method;
    load_min_max(paths.bounds, atk.lower_bounds, atk.upper_bounds);
    atk.seed = seeds.dump;

    const attack_result res = inner_maximize(net, X, y, atk);
    const matrix lp_orig = forward(net, X).log_probs();
    const matrix lp_adv = forward(net, res.adversarial).log_probs();

    const std::string path = artifact_paths::dump(cfg.out_dir, method_name);
    std::ofstream out = detail::open_out(path);
    for (const std::string& name : ds.feature_names) out << "orig_" << name << ",";
    for (const std::string& name : ds.feature_names) out << "adv_" << name << ",";
    out << "linf,orig_pred,adv_pred\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < X.cols; ++j) out << format_double(X(i, j)) << ",";
        for (std::size_t j = 0; j < X.cols; ++j)
            out << format_double(res.adversarial(i, j)) << ",";
        out << format_double(linf_distance(X.row_ptr(i), res.adversarial.row_ptr(i), X.cols))
            << "," << predict_row(lp_orig, i) << "," << predict_row(lp_adv, i) << "\n";
    }
    if (!out) throw io_error("write failed on '" + path + "'");

    log << "attack-dump[" << method_name << "]: wrote " << n << " pairs to " << path << "\n";
    return n;
}

// --------------------------------------------------------------------- synth

/// Standalone generator: writes a raw source CSV usable as a prep input.
inline dataset run_synth(const synth_config& cfg, const std::string& path,
                         std::ostream& log = std::cout) {
    const dataset ds = synth_generate(cfg);
    save_source_csv(ds, path);
    log << "synth: wrote " << ds.n_rows() << " rows (" << ds.n_features() << " features) to "
        << path << "\n";
    return ds;
}

}  // namespace advids

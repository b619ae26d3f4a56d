#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "advids/error.hpp"
#include "advids/matrix.hpp"
#include "advids/rng.hpp"

namespace advids {

enum class split_tag : int { train = 0, val = 1, test = 2 };

inline const char* to_string(split_tag t) {
    switch (t) {
        case split_tag::train: return "train";
        case split_tag::val: return "val";
        case split_tag::test: return "test";
    }
    return "?";
}

inline split_tag parse_split_tag(const std::string& s) {
    if (s == "train") return split_tag::train;
    if (s == "val") return split_tag::val;
    if (s == "test") return split_tag::test;
    throw data_error("unknown split tag '" + s + "'");
}

/// Labeled feature table. Labels: 0 = benign, 1 = attack. Every row carries a
/// split tag; `normalized` records that all entries live in [0,1].
struct dataset {
    matrix X;
    std::vector<int> y;
    std::vector<std::string> feature_names;
    std::vector<split_tag> split;
    bool normalized = false;

    std::size_t n_rows() const { return X.rows; }
    std::size_t n_features() const { return X.cols; }

    void validate() const {
        if (y.size() != X.rows || split.size() != X.rows)
            throw shape_error("dataset: row counts of X, y, split disagree");
        if (feature_names.size() != X.cols)
            throw shape_error("dataset: feature name count does not match columns");
        for (const int v : y)
            if (v != 0 && v != 1) throw data_error("dataset: label outside {0,1}");
        if (normalized)
            for (const double v : X.data)
                if (v < -1e-9 || v > 1.0 + 1e-9)
                    throw data_error("dataset: normalized flag set but entry outside [0,1]");
    }

    std::vector<std::size_t> rows_with_tag(split_tag tag) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < split.size(); ++i)
            if (split[i] == tag) idx.push_back(i);
        return idx;
    }

    /// Rows carrying `tag` and label `label`, in row order.
    std::vector<std::size_t> rows_with(split_tag tag, int label) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < split.size(); ++i)
            if (split[i] == tag && y[i] == label) idx.push_back(i);
        return idx;
    }

    /// Row subset as a new dataset; tags and labels follow the rows.
    dataset subset(const std::vector<std::size_t>& idx) const {
        dataset out;
        out.X = take_rows(X, idx);
        out.y.reserve(idx.size());
        out.split.reserve(idx.size());
        for (const std::size_t i : idx) {
            out.y.push_back(y[i]);
            out.split.push_back(split[i]);
        }
        out.feature_names = feature_names;
        out.normalized = normalized;
        return out;
    }
};

enum class categorical_encoding { ordinal, onehot };

namespace detail {

inline bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    for (std::string& cell : cells) {
        // trim blanks and a single layer of double quotes
        std::size_t b = cell.find_first_not_of(" \t");
        std::size_t e = cell.find_last_not_of(" \t");
        cell = (b == std::string::npos) ? std::string() : cell.substr(b, e - b + 1);
        if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"')
            cell = cell.substr(1, cell.size() - 2);
    }
    return cells;
}

}  // namespace detail

/// Load a comma-separated file with a header row. Column types come from the
/// first data row: cells that parse as numbers make a numeric column, the rest
/// are categorical and get encoded (ordinal by sorted vocabulary, or one-hot).
/// The label column maps to 1 where the cell equals `positive_label`, else 0.
inline dataset load_csv(const std::string& path, const std::string& label_column,
                        const std::string& positive_label,
                        categorical_encoding encoding = categorical_encoding::ordinal) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw data_error("'" + path + "': empty file, header expected");
    const std::vector<std::string> header = detail::split_csv_line(line);

    std::size_t label_idx = header.size();
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == label_column) label_idx = c;
    if (label_idx == header.size())
        throw data_error("'" + path + "': label column '" + label_column + "' not found");

    // pass 1: pull all cells in, skipping blank lines
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw parse_error("'" + path + "' row " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " cells, got " +
                              std::to_string(cells.size()));
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw data_error("'" + path + "': no data rows");

    // column typing from the first data row
    std::vector<bool> is_numeric(header.size(), true);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == label_idx) continue;
        double ignored;
        is_numeric[c] = detail::parse_double(rows[0][c], ignored);
    }

    // vocabularies for categorical columns, sorted for a stable code order
    std::vector<std::vector<std::string>> vocab(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == label_idx || is_numeric[c]) continue;
        std::vector<std::string> values;
        for (const auto& r : rows) values.push_back(r[c]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        vocab[c] = std::move(values);
    }

    dataset out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == label_idx) continue;
        if (is_numeric[c] || encoding == categorical_encoding::ordinal) {
            out.feature_names.push_back(header[c]);
        } else {
            for (const std::string& v : vocab[c]) out.feature_names.push_back(header[c] + "=" + v);
        }
    }

    out.X = matrix(rows.size(), out.feature_names.size());
    out.y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t col = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            const std::string& cell = rows[i][c];
            if (c == label_idx) {
                out.y[i] = (cell == positive_label) ? 1 : 0;
                continue;
            }
            if (is_numeric[c]) {
                double v;
                if (!detail::parse_double(cell, v))
                    throw parse_error("'" + path + "' row " + std::to_string(i + 2) +
                                      ": cell '" + cell + "' in numeric column '" + header[c] +
                                      "' does not parse");
                out.X(i, col++) = v;
            } else if (encoding == categorical_encoding::ordinal) {
                const auto it = std::lower_bound(vocab[c].begin(), vocab[c].end(), cell);
                out.X(i, col++) = static_cast<double>(it - vocab[c].begin());
            } else {
                const auto it = std::lower_bound(vocab[c].begin(), vocab[c].end(), cell);
                const std::size_t hot = static_cast<std::size_t>(it - vocab[c].begin());
                for (std::size_t v = 0; v < vocab[c].size(); ++v)
                    out.X(i, col++) = (v == hot) ? 1.0 : 0.0;
            }
        }
    }
    out.split.assign(rows.size(), split_tag::train);
    out.validate();
    return out;
}

namespace detail {

inline double entropy_from_counts(const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (const std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

/// Equal-frequency bin index of `v` against edges at the decile positions of
/// the sorted training values. Equal values always share a bin.
inline std::size_t bin_of(double v, const std::vector<double>& edges) {
    std::size_t b = 0;
    for (const double e : edges)
        if (v >= e) ++b;
    return b;
}

inline std::vector<double> decile_edges(std::vector<double> sorted_values, std::size_t n_bins) {
    std::sort(sorted_values.begin(), sorted_values.end());
    std::vector<double> edges;
    const std::size_t n = sorted_values.size();
    for (std::size_t i = 1; i < n_bins; ++i) {
        const std::size_t pos = i * n / n_bins;
        if (pos > 0 && pos < n) edges.push_back(sorted_values[pos]);
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

}  // namespace detail

/// Information gain of one feature against the labels over the given rows,
/// using equal-frequency binning (10 bins). Entropy in bits.
inline double information_gain(const dataset& ds, std::size_t feature,
                               const std::vector<std::size_t>& rows, std::size_t n_bins = 10) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (const std::size_t i : rows) values.push_back(ds.X(i, feature));
    const std::vector<double> edges = detail::decile_edges(values, n_bins);

    const std::size_t bins = edges.size() + 1;
    std::vector<std::size_t> label_counts(2, 0);
    std::vector<std::size_t> bin_totals(bins, 0);
    std::vector<std::size_t> bin_label(bins * 2, 0);
    for (const std::size_t i : rows) {
        const std::size_t b = detail::bin_of(ds.X(i, feature), edges);
        ++label_counts[static_cast<std::size_t>(ds.y[i])];
        ++bin_totals[b];
        ++bin_label[b * 2 + static_cast<std::size_t>(ds.y[i])];
    }

    const double h_y = detail::entropy_from_counts(label_counts, rows.size());
    double h_cond = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        if (bin_totals[b] == 0) continue;
        const double w = static_cast<double>(bin_totals[b]) / static_cast<double>(rows.size());
        h_cond += w * detail::entropy_from_counts({bin_label[b * 2], bin_label[b * 2 + 1]},
                                                  bin_totals[b]);
    }
    return h_y - h_cond;
}

/// Indices of the top-k features by information gain on the train split,
/// descending score, ties broken toward the lower index.
inline std::vector<std::size_t> rank_features(const dataset& ds, std::size_t k) {
    if (k > ds.n_features())
        throw config_error("rank_features: k = " + std::to_string(k) + " exceeds " +
                           std::to_string(ds.n_features()) + " features");
    const std::vector<std::size_t> rows = ds.rows_with_tag(split_tag::train);
    if (rows.empty()) throw data_error("rank_features: empty train split");

    std::vector<std::pair<double, std::size_t>> scored(ds.n_features());
    for (std::size_t j = 0; j < ds.n_features(); ++j)
        scored[j] = {information_gain(ds, j, rows), j};
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::vector<std::size_t> out(k);
    for (std::size_t j = 0; j < k; ++j) out[j] = scored[j].second;
    return out;
}

/// Column subset in the given order.
inline dataset select_features(const dataset& ds, const std::vector<std::size_t>& indices) {
    for (const std::size_t j : indices)
        if (j >= ds.n_features())
            throw config_error("select_features: index " + std::to_string(j) + " out of range");
    dataset out;
    out.X = matrix(ds.n_rows(), indices.size());
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        for (std::size_t c = 0; c < indices.size(); ++c) out.X(i, c) = ds.X(i, indices[c]);
    out.y = ds.y;
    out.split = ds.split;
    out.normalized = ds.normalized;
    out.feature_names.reserve(indices.size());
    for (const std::size_t j : indices) out.feature_names.push_back(ds.feature_names[j]);
    return out;
}

/// Per-feature min/max observed on the fitting split.
struct normalization_model {
    std::vector<double> feature_min;
    std::vector<double> feature_max;

    void validate() const {
        if (feature_min.size() != feature_max.size())
            throw shape_error("normalization_model: min/max length mismatch");
        for (std::size_t j = 0; j < feature_min.size(); ++j)
            if (!(feature_min[j] <= feature_max[j]))
                throw data_error("normalization_model: min above max at feature " +
                                 std::to_string(j));
    }
};

/// Fit min/max on the train rows only.
inline normalization_model fit_normalizer(const dataset& ds) {
    const std::vector<std::size_t> rows = ds.rows_with_tag(split_tag::train);
    if (rows.empty()) throw data_error("fit_normalizer: empty train split");
    normalization_model model;
    model.feature_min.assign(ds.n_features(), 0.0);
    model.feature_max.assign(ds.n_features(), 0.0);
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
        double lo = ds.X(rows[0], j), hi = ds.X(rows[0], j);
        for (const std::size_t i : rows) {
            lo = std::min(lo, ds.X(i, j));
            hi = std::max(hi, ds.X(i, j));
        }
        model.feature_min[j] = lo;
        model.feature_max[j] = hi;
    }
    return model;
}

/// x' = (x - min) / (max - min), clipped to [0,1]; constant features map to 0.
/// A dataset already carrying the normalized flag passes through unchanged,
/// which makes repeated application a no-op.
inline dataset apply_normalizer(const normalization_model& model, const dataset& ds) {
    model.validate();
    if (model.feature_min.size() != ds.n_features())
        throw shape_error("apply_normalizer: model width does not match dataset");
    if (ds.normalized) return ds;

    dataset out = ds;
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
        const double lo = model.feature_min[j];
        const double range = model.feature_max[j] - lo;
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
            const double v = (range > 0.0) ? (ds.X(i, j) - lo) / range : 0.0;
            out.X(i, j) = std::min(1.0, std::max(0.0, v));
        }
    }
    out.normalized = true;
    out.validate();
    return out;
}

/// Stratified split: per class, floor(fraction * n) rows go to train, then
/// val, remainder test. Deterministic in the seed.
inline dataset split_dataset(const dataset& ds, double train_fraction, double val_fraction,
                             std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(val_fraction > 0.0) ||
        train_fraction + val_fraction > 1.0 + 1e-12)
        throw config_error("split: fractions must be positive and sum to at most 1");

    dataset out = ds;
    for (const int label : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ds.n_rows(); ++i)
            if (ds.y[i] == label) idx.push_back(i);
        rng r(derive_seed(seed, static_cast<std::uint64_t>(label)));
        shuffle(idx, r);

        const std::size_t n = idx.size();
        const std::size_t n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
        const std::size_t n_val = static_cast<std::size_t>(val_fraction * static_cast<double>(n));
        for (std::size_t p = 0; p < n; ++p) {
            split_tag tag = split_tag::test;
            if (p < n_train)
                tag = split_tag::train;
            else if (p < n_train + n_val)
                tag = split_tag::val;
            out.split[idx[p]] = tag;
        }
    }
    return out;
}

/// Synthetic two-cluster generator standing in for a flow dataset at desk
/// scale: class means sit class_separation apart along a random unit
/// direction, isotropic Gaussian noise around each, then a global per-feature
/// affine squash into [0,1]^n.
struct synth_config {
    std::size_t n_features = 16;
    std::size_t n_attack = 2000;
    std::size_t n_benign = 2000;
    double class_separation = 4.0;
    double noise_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_features < 1 || n_attack < 1 || n_benign < 1)
            throw config_error("synth_config: counts must be >= 1");
        if (!(class_separation >= 0.0)) throw config_error("synth_config: separation must be >= 0");
        if (!(noise_scale > 0.0)) throw config_error("synth_config: noise_scale must be > 0");
    }
};

inline dataset synth_generate(const synth_config& cfg) {
    cfg.validate();
    rng r(derive_seed(cfg.seed, "synth"));

    // random unit direction separating the class means
    std::vector<double> dir(cfg.n_features);
    double norm = 0.0;
    for (double& v : dir) {
        v = r.normal();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        dir.assign(cfg.n_features, 0.0);
        dir[0] = 1.0;
        norm = 1.0;
    }
    for (double& v : dir) v /= norm;

    const std::size_t n = cfg.n_benign + cfg.n_attack;
    dataset out;
    out.X = matrix(n, cfg.n_features);
    out.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = (i < cfg.n_benign) ? 0 : 1;
        const double shift = (label == 0 ? -0.5 : 0.5) * cfg.class_separation;
        out.y[i] = label;
        for (std::size_t j = 0; j < cfg.n_features; ++j)
            out.X(i, j) = shift * dir[j] + cfg.noise_scale * r.normal();
    }

    // squash each feature into [0,1] over the whole set
    for (std::size_t j = 0; j < cfg.n_features; ++j) {
        double lo = out.X(0, j), hi = out.X(0, j);
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min(lo, out.X(i, j));
            hi = std::max(hi, out.X(i, j));
        }
        const double range = hi - lo;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = (range > 0.0) ? (out.X(i, j) - lo) / range : 0.0;
            out.X(i, j) = std::min(1.0, std::max(0.0, v));
        }
    }

    out.feature_names.resize(cfg.n_features);
    for (std::size_t j = 0; j < cfg.n_features; ++j) {
        std::ostringstream name;
        name << "f" << (j < 10 ? "0" : "") << j;
        out.feature_names[j] = name.str();
    }
    out.split.assign(n, split_tag::train);
    out.normalized = true;
    out.validate();
    return out;
}

}  // namespace advids

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "advids/data.hpp"
#include "advids/error.hpp"
#include "advids/metrics.hpp"
#include "advids/net.hpp"
#include "advids/pca.hpp"
#include "advids/train.hpp"

namespace advids {

/// Shortest decimal form that parses back to the identical bits; keeps every
/// save/load cycle, and therefore every rerun, byte-for-byte reproducible.
inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double_strict(const std::string& cell, const std::string& context) {
    double v;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw parse_error(context + ": cell '" + cell + "' is not a number");
    return v;
}

inline long long parse_int_strict(const std::string& cell, const std::string& context) {
    long long v;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw parse_error(context + ": cell '" + cell + "' is not an integer");
    return v;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);  // binary: no newline translation
    if (!out) throw io_error("cannot write '" + path + "'");
    return out;
}

inline std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    if (rows.empty()) throw data_error("'" + path + "': empty file");
    return rows;
}

inline std::string sanitize_name(const std::string& name) {
    std::string out = name;
    for (char& c : out)
        if (c == ',' || c == '\n' || c == '\r') c = '_';
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------- checkpoint

/// Model checkpoint: a comma-separated text file; one magic line, the layer
/// sizes, then each layer's weight rows and bias row.
inline void save_net(const dense_net& net, const std::string& path) {
    std::ofstream out = detail::open_out(path);
    out << "advids-net,1\n";
    out << "layers";
    for (const std::size_t s : net.layer_sizes) out << "," << s;
    out << "\n";
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        out << "weights," << l << "\n";
        for (std::size_t r = 0; r < net.weights[l].rows; ++r) {
            for (std::size_t c = 0; c < net.weights[l].cols; ++c)
                out << (c ? "," : "") << format_double(net.weights[l](r, c));
            out << "\n";
        }
        out << "biases," << l << "\n";
        for (std::size_t c = 0; c < net.biases[l].size(); ++c)
            out << (c ? "," : "") << format_double(net.biases[l][c]);
        out << "\n";
    }
    if (!out) throw io_error("write failed on '" + path + "'");
}

inline dense_net load_net(const std::string& path) {
    const auto rows = detail::read_csv_rows(path);
    std::size_t at = 0;
    const auto need = [&](const std::string& what) -> const std::vector<std::string>& {
        if (at >= rows.size()) throw parse_error("'" + path + "': truncated before " + what);
        return rows[at++];
    };

    const auto& magic = need("magic");
    if (magic.size() != 2 || magic[0] != "advids-net" || magic[1] != "1")
        throw parse_error("'" + path + "': not a model checkpoint");

    const auto& layer_row = need("layer sizes");
    if (layer_row.size() < 3 || layer_row[0] != "layers")
        throw parse_error("'" + path + "': bad layer line");
    std::vector<std::size_t> sizes;
    for (std::size_t i = 1; i < layer_row.size(); ++i)
        sizes.push_back(static_cast<std::size_t>(parse_int_strict(layer_row[i], path)));

    dense_net net;
    net.layer_sizes = sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const auto& wh = need("weights header");
        if (wh.size() != 2 || wh[0] != "weights" ||
            parse_int_strict(wh[1], path) != static_cast<long long>(l))
            throw parse_error("'" + path + "': expected weights header for layer " +
                              std::to_string(l));
        matrix w(sizes[l + 1], sizes[l]);
        for (std::size_t r = 0; r < w.rows; ++r) {
            const auto& row = need("weight row");
            if (row.size() != w.cols)
                throw parse_error("'" + path + "': weight row width mismatch at layer " +
                                  std::to_string(l));
            for (std::size_t c = 0; c < w.cols; ++c) w(r, c) = parse_double_strict(row[c], path);
        }
        net.weights.push_back(std::move(w));

        const auto& bh = need("biases header");
        if (bh.size() != 2 || bh[0] != "biases" ||
            parse_int_strict(bh[1], path) != static_cast<long long>(l))
            throw parse_error("'" + path + "': expected biases header for layer " +
                              std::to_string(l));
        const auto& brow = need("bias row");
        if (brow.size() != sizes[l + 1])
            throw parse_error("'" + path + "': bias row width mismatch at layer " +
                              std::to_string(l));
        std::vector<double> b(sizes[l + 1]);
        for (std::size_t c = 0; c < b.size(); ++c) b[c] = parse_double_strict(brow[c], path);
        net.biases.push_back(std::move(b));
    }
    if (at != rows.size()) throw parse_error("'" + path + "': trailing content");
    return net;
}

// ------------------------------------------------------------------- dataset

/// Prepared dataset: feature columns, then `label`, then `split`.
inline void save_dataset(const dataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out = detail::open_out(path);
    for (const std::string& name : ds.feature_names) out << detail::sanitize_name(name) << ",";
    out << "label,split\n";
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = 0; j < ds.n_features(); ++j)
            out << format_double(ds.X(i, j)) << ",";
        out << ds.y[i] << "," << to_string(ds.split[i]) << "\n";
    }
    if (!out) throw io_error("write failed on '" + path + "'");
}

inline dataset load_dataset(const std::string& path) {
    const auto rows = detail::read_csv_rows(path);
    const auto& header = rows[0];
    if (header.size() < 3 || header[header.size() - 2] != "label" || header.back() != "split")
        throw data_error("'" + path + "': expected trailing label,split columns");
    const std::size_t m = header.size() - 2;

    dataset ds;
    ds.feature_names.assign(header.begin(), header.end() - 2);
    ds.X = matrix(rows.size() - 1, m);
    ds.y.resize(rows.size() - 1);
    ds.split.resize(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != header.size())
            throw parse_error("'" + path + "' row " + std::to_string(i + 1) + ": width mismatch");
        for (std::size_t j = 0; j < m; ++j)
            ds.X(i - 1, j) = parse_double_strict(rows[i][j], path);
        const long long label = parse_int_strict(rows[i][m], path);
        if (label != 0 && label != 1)
            throw data_error("'" + path + "' row " + std::to_string(i + 1) + ": label not 0/1");
        ds.y[i - 1] = static_cast<int>(label);
        ds.split[i - 1] = parse_split_tag(rows[i][m + 1]);
    }
    // a prepared dataset confined to the unit box counts as normalized
    bool in_box = true;
    for (const double v : ds.X.data)
        if (v < -1e-9 || v > 1.0 + 1e-9) in_box = false;
    ds.normalized = in_box;
    ds.validate();
    return ds;
}

/// Raw source CSV (a synthetic stand-in for a captured flow table): feature
/// columns then a `label` column, no split tags.
inline void save_source_csv(const dataset& ds, const std::string& path) {
    std::ofstream out = detail::open_out(path);
    for (const std::string& name : ds.feature_names) out << detail::sanitize_name(name) << ",";
    out << "label\n";
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = 0; j < ds.n_features(); ++j)
            out << format_double(ds.X(i, j)) << ",";
        out << ds.y[i] << "\n";
    }
    if (!out) throw io_error("write failed on '" + path + "'");
}

// ------------------------------------------------- normalizer / bounds / pca

/// Two data rows under the feature-name header: the min row, then the max row.
inline void save_min_max(const std::vector<std::string>& names, const std::vector<double>& lo,
                         const std::vector<double>& hi, const std::string& path) {
    if (names.size() != lo.size() || lo.size() != hi.size())
        throw shape_error("save_min_max: length mismatch");
    std::ofstream out = detail::open_out(path);
    for (std::size_t j = 0; j < names.size(); ++j)
        out << (j ? "," : "") << detail::sanitize_name(names[j]);
    out << "\n";
    for (std::size_t j = 0; j < lo.size(); ++j) out << (j ? "," : "") << format_double(lo[j]);
    out << "\n";
    for (std::size_t j = 0; j < hi.size(); ++j) out << (j ? "," : "") << format_double(hi[j]);
    out << "\n";
    if (!out) throw io_error("write failed on '" + path + "'");
}

inline void load_min_max(const std::string& path, std::vector<double>& lo,
                         std::vector<double>& hi) {
    const auto rows = detail::read_csv_rows(path);
    if (rows.size() != 3) throw parse_error("'" + path + "': expected header + 2 rows");
    const std::size_t m = rows[0].size();
    if (rows[1].size() != m || rows[2].size() != m)
        throw parse_error("'" + path + "': row width mismatch");
    lo.resize(m);
    hi.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        lo[j] = parse_double_strict(rows[1][j], path);
        hi[j] = parse_double_strict(rows[2][j], path);
    }
}

inline void save_normalizer(const normalization_model& model,
                            const std::vector<std::string>& names, const std::string& path) {
    save_min_max(names, model.feature_min, model.feature_max, path);
}

inline normalization_model load_normalizer(const std::string& path) {
    normalization_model model;
    load_min_max(path, model.feature_min, model.feature_max);
    model.validate();
    return model;
}

/// Headerless layout: mean row, one row per component, ratio row last.
inline void save_pca(const pca_model& model, const std::string& path) {
    std::ofstream out = detail::open_out(path);
    for (std::size_t j = 0; j < model.mean.size(); ++j)
        out << (j ? "," : "") << format_double(model.mean[j]);
    out << "\n";
    for (std::size_t r = 0; r < model.k_max(); ++r) {
        for (std::size_t j = 0; j < model.components.cols; ++j)
            out << (j ? "," : "") << format_double(model.components(r, j));
        out << "\n";
    }
    for (std::size_t r = 0; r < model.explained_variance_ratio.size(); ++r)
        out << (r ? "," : "") << format_double(model.explained_variance_ratio[r]);
    out << "\n";
    if (!out) throw io_error("write failed on '" + path + "'");
}

inline pca_model load_pca(const std::string& path) {
    const auto rows = detail::read_csv_rows(path);
    if (rows.size() < 3) throw parse_error("'" + path + "': too short for a projection model");
    const std::size_t m = rows[0].size();
    const std::size_t k = rows.size() - 2;

    pca_model model;
    model.mean.resize(m);
    for (std::size_t j = 0; j < m; ++j) model.mean[j] = parse_double_strict(rows[0][j], path);
    model.components = matrix(k, m);
    for (std::size_t r = 0; r < k; ++r) {
        if (rows[1 + r].size() != m) throw parse_error("'" + path + "': component width mismatch");
        for (std::size_t j = 0; j < m; ++j)
            model.components(r, j) = parse_double_strict(rows[1 + r][j], path);
    }
    const auto& ratio_row = rows.back();
    if (ratio_row.size() != k) throw parse_error("'" + path + "': ratio row width mismatch");
    model.explained_variance_ratio.resize(k);
    for (std::size_t r = 0; r < k; ++r)
        model.explained_variance_ratio[r] = parse_double_strict(ratio_row[r], path);
    // eigenvalues are not persisted; the ratios carry the same ordering
    model.eigenvalues = model.explained_variance_ratio;
    model.validate();
    return model;
}

// ------------------------------------------------------------------- history

inline void save_history(const train_history& history, const std::string& path) {
    std::ofstream out = detail::open_out(path);
    out << "epoch,train_loss,val_loss,val_acc,distinct_adversarials\n";
    for (std::size_t e = 0; e < history.epochs.size(); ++e) {
        const epoch_stats& s = history.epochs[e];
        out << e << "," << format_double(s.train_loss) << "," << format_double(s.val_loss) << ","
            << format_double(s.val_accuracy) << "," << s.distinct_adversarials << "\n";
    }
    if (!out) throw io_error("write failed on '" + path + "'");
}

/// Reads the per-epoch rows back. n_attack_train is not stored in the file;
/// the caller supplies it from the dataset when computing coverage.
inline train_history load_history(const std::string& path) {
    const auto rows = detail::read_csv_rows(path);
    if (rows[0] != std::vector<std::string>{"epoch", "train_loss", "val_loss", "val_acc",
                                            "distinct_adversarials"})
        throw parse_error("'" + path + "': unexpected history header");
    train_history history;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 5) throw parse_error("'" + path + "': history row width mismatch");
        epoch_stats s;
        s.train_loss = parse_double_strict(rows[i][1], path);
        s.val_loss = parse_double_strict(rows[i][2], path);
        s.val_accuracy = parse_double_strict(rows[i][3], path);
        s.distinct_adversarials =
            static_cast<std::uint64_t>(parse_int_strict(rows[i][4], path));
        history.epochs.push_back(s);
        history.final_epoch = static_cast<int>(i) - 1;
    }
    return history;
}

// ------------------------------------------------------------------- reports

inline void save_matrix_csv(const evasion_matrix& m, const std::string& path) {
    std::ofstream out = detail::open_out(path);
    out << "model";
    for (const std::string& a : m.attack_names) out << "," << a;
    out << "\n";
    for (std::size_t i = 0; i < m.model_names.size(); ++i) {
        out << m.model_names[i];
        for (std::size_t j = 0; j < m.attack_names.size(); ++j)
            out << "," << format_double(m.cells(i, j));
        out << "\n";
    }
    if (!out) throw io_error("write failed on '" + path + "'");
}

struct model_metrics_row {
    std::string model;
    double accuracy_pct = 0.0;
    double fpr_pct = 0.0;
    double evasion_pct = 0.0;  // clean-set false-negative rate
    double cn = 0.0;
};

inline void save_metrics_csv(const std::vector<model_metrics_row>& rows,
                             const std::string& path) {
    std::ofstream out = detail::open_out(path);
    out << "model,accuracy,fpr,evasion_rate,cn\n";
    for (const model_metrics_row& r : rows)
        out << r.model << "," << format_double(r.accuracy_pct) << "," << format_double(r.fpr_pct)
            << "," << format_double(r.evasion_pct) << "," << format_double(r.cn) << "\n";
    if (!out) throw io_error("write failed on '" + path + "'");
}

/// Fixed-width console rendering of the evasion grid.
inline std::string render_matrix_table(const evasion_matrix& m) {
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-10s", "model");
    out << buf;
    for (const std::string& a : m.attack_names) {
        std::snprintf(buf, sizeof(buf), "%10s", a.c_str());
        out << buf;
    }
    out << "\n";
    for (std::size_t i = 0; i < m.model_names.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%-10s", m.model_names[i].c_str());
        out << buf;
        for (std::size_t j = 0; j < m.attack_names.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%10.2f", m.cells(i, j));
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

inline std::string render_metrics_table(const std::vector<model_metrics_row>& rows) {
    std::ostringstream out;
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%-10s%10s%10s%14s%8s", "model", "accuracy", "fpr",
                  "evasion_rate", "cn");
    out << buf << "\n";
    for (const model_metrics_row& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-10s%10.2f%10.2f%14.2f%8.2f", r.model.c_str(),
                      r.accuracy_pct, r.fpr_pct, r.evasion_pct, r.cn);
        out << buf << "\n";
    }
    return out.str();
}

// ------------------------------------------------------------------ manifest

inline void save_manifest(const std::map<std::string, std::string>& entries,
                          const std::string& path) {
    std::ofstream out = detail::open_out(path);
    for (const auto& [key, value] : entries) out << key << "=" << value << "\n";
    if (!out) throw io_error("write failed on '" + path + "'");
}

inline std::map<std::string, std::string> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw parse_error("'" + path + "': line without '='");
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

}  // namespace advids

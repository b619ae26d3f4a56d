#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "advids/data.hpp"
#include "oracles.hpp"

using namespace advids;

namespace {

struct temp_csv {
    std::string path;
    temp_csv(const std::string& name, const std::string& content) : path(name) {
        std::ofstream out(path);
        out << content;
    }
    ~temp_csv() { std::remove(path.c_str()); }
};

dataset single_feature_dataset(const std::vector<double>& values, const std::vector<int>& labels) {
    dataset ds;
    ds.X = matrix(values.size(), 1);
    for (std::size_t i = 0; i < values.size(); ++i) ds.X(i, 0) = values[i];
    ds.y = labels;
    ds.feature_names = {"f0"};
    ds.split.assign(values.size(), split_tag::train);
    return ds;
}

}  // namespace

TEST_CASE("load_csv parses a small fixture with ordinal categories") {
    const temp_csv f("fixture_basic.csv",
                     "dur,proto,label\n"
                     "1.5,tcp,attack\n"
                     "2.0,udp,normal\n"
                     "0.5,icmp,attack\n");
    const dataset ds = load_csv(f.path, "label", "attack");
    REQUIRE(ds.n_rows() == 3);
    REQUIRE(ds.n_features() == 2);
    CHECK(ds.y == std::vector<int>{1, 0, 1});
    CHECK(ds.feature_names == std::vector<std::string>{"dur", "proto"});
    // vocabulary {icmp, tcp, udp} sorted: tcp=1, udp=2, icmp=0
    CHECK(ds.X(0, 1) == 1.0);
    CHECK(ds.X(1, 1) == 2.0);
    CHECK(ds.X(2, 1) == 0.0);
    CHECK(ds.X(0, 0) == 1.5);
}

TEST_CASE("load_csv expands categories one-hot on request") {
    const temp_csv f("fixture_onehot.csv",
                     "a,proto,label\n"
                     "1,tcp,1\n"
                     "2,udp,0\n");
    const dataset ds = load_csv(f.path, "label", "1", categorical_encoding::onehot);
    REQUIRE(ds.n_features() == 3);
    CHECK(ds.feature_names == std::vector<std::string>{"a", "proto=tcp", "proto=udp"});
    CHECK(ds.X(0, 1) == 1.0);
    CHECK(ds.X(0, 2) == 0.0);
    CHECK(ds.X(1, 1) == 0.0);
    CHECK(ds.X(1, 2) == 1.0);
}

TEST_CASE("load_csv error contracts") {
    SECTION("missing file") {
        CHECK_THROWS_AS(load_csv("no_such_file.csv", "label", "1"), io_error);
    }
    SECTION("missing label column") {
        const temp_csv f("fixture_nolabel.csv", "a,b\n1,2\n");
        CHECK_THROWS_AS(load_csv(f.path, "label", "1"), data_error);
    }
    SECTION("non-numeric cell in a numeric column names the row") {
        const temp_csv f("fixture_badcell.csv", "a,label\n1.0,0\noops,1\n");
        try {
            load_csv(f.path, "label", "1");
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(std::string(e.what()).find("row 3") != std::string::npos);
        }
    }
    SECTION("ragged row") {
        const temp_csv f("fixture_ragged.csv", "a,b,label\n1,2,0\n1,0\n");
        CHECK_THROWS_AS(load_csv(f.path, "label", "1"), parse_error);
    }
    SECTION("header only") {
        const temp_csv f("fixture_empty.csv", "a,label\n");
        CHECK_THROWS_AS(load_csv(f.path, "label", "1"), data_error);
    }
}

TEST_CASE("a feature equal to the label ranks first") {
    // enough rows that every noise bin mixes both labels
    const std::size_t n = 200;
    dataset ds;
    ds.X = matrix(n, 3);
    ds.y.resize(n);
    rng r(3);
    for (std::size_t i = 0; i < n; ++i) {
        ds.y[i] = static_cast<int>(i % 2);
        ds.X(i, 0) = r.uniform(0.0, 1.0);            // noise
        ds.X(i, 1) = static_cast<double>(ds.y[i]);   // label copy
        ds.X(i, 2) = 0.25;                           // constant
    }
    ds.feature_names = {"noise", "copy", "flat"};
    ds.split.assign(n, split_tag::train);

    const std::vector<std::size_t> order = rank_features(ds, 3);
    CHECK(order[0] == 1);
    CHECK(order[2] == 2);
    CHECK(information_gain(ds, 2, ds.rows_with_tag(split_tag::train)) == 0.0);
    // a balanced perfectly informative feature carries the full label entropy
    CHECK(information_gain(ds, 1, ds.rows_with_tag(split_tag::train)) ==
          Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("feature ranking matches the brute-force mutual-information oracle") {
    rng r(97);
    dataset ds;
    const std::size_t n = 120, m = 5;
    ds.X = matrix(n, m);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ds.y[i] = static_cast<int>(r.uniform_index(2));
        for (std::size_t j = 0; j < m; ++j) {
            const double signal = static_cast<double>(ds.y[i]) * 0.3 * static_cast<double>(j);
            ds.X(i, j) = signal + r.uniform(0.0, 1.0);
        }
    }
    ds.feature_names = {"f0", "f1", "f2", "f3", "f4"};
    ds.split.assign(n, split_tag::train);
    const std::vector<std::size_t> rows = ds.rows_with_tag(split_tag::train);

    std::vector<std::pair<double, std::size_t>> oracle(m);
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> vals(n);
        for (std::size_t i = 0; i < n; ++i) vals[i] = ds.X(i, j);
        oracle[j] = {oracles::brute_force_information_gain(vals, ds.y), j};
        // scores agree route to route
        CHECK(std::abs(oracle[j].first - information_gain(ds, j, rows)) < 1e-10);
    }
    std::stable_sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::size_t> expect(m);
    for (std::size_t j = 0; j < m; ++j) expect[j] = oracle[j].second;

    CHECK(rank_features(ds, m) == expect);
}

TEST_CASE("rank_features rejects k beyond the feature count") {
    dataset ds = single_feature_dataset({1.0, 2.0}, {0, 1});
    CHECK_THROWS_AS(rank_features(ds, 2), config_error);
}

TEST_CASE("rank_features uses only the train split") {
    // feature 0 is informative only on rows we push out of the train split
    dataset ds;
    ds.X = matrix(8, 2);
    ds.y = {0, 1, 0, 1, 0, 1, 0, 1};
    for (std::size_t i = 0; i < 8; ++i) {
        ds.X(i, 0) = (i < 4) ? static_cast<double>(ds.y[i]) : 0.5;
        ds.X(i, 1) = (i >= 4) ? static_cast<double>(ds.y[i]) : 0.5;
    }
    ds.feature_names = {"early", "late"};
    ds.split.assign(8, split_tag::train);
    for (std::size_t i = 0; i < 4; ++i) ds.split[i] = split_tag::test;

    // only rows 4..7 are trainable, where feature 1 is the informative one
    const std::vector<std::size_t> order = rank_features(ds, 2);
    CHECK(order[0] == 1);
}

TEST_CASE("select_features keeps the requested columns in order") {
    dataset ds;
    ds.X = matrix(2, 3, {1, 2, 3, 4, 5, 6});
    ds.y = {0, 1};
    ds.feature_names = {"a", "b", "c"};
    ds.split.assign(2, split_tag::train);

    const dataset out = select_features(ds, {2, 0});
    CHECK(out.feature_names == std::vector<std::string>{"c", "a"});
    CHECK(out.X.data == std::vector<double>{3, 1, 6, 4});
    CHECK_THROWS_AS(select_features(ds, {3}), config_error);
}

TEST_CASE("normalizer maps the train range onto [0,1]") {
    dataset ds = single_feature_dataset({2.0, 4.0, 3.0, 5.0}, {0, 1, 0, 1});
    ds.split = {split_tag::train, split_tag::train, split_tag::train, split_tag::test};

    const normalization_model model = fit_normalizer(ds);
    // the test row's value 5 must not stretch the fitted range
    CHECK(model.feature_min[0] == 2.0);
    CHECK(model.feature_max[0] == 4.0);

    const dataset out = apply_normalizer(model, ds);
    CHECK(out.X(2, 0) == 0.5);
    CHECK(out.X(0, 0) == 0.0);
    CHECK(out.X(1, 0) == 1.0);
    CHECK(out.X(3, 0) == 1.0);  // clipped
    CHECK(out.normalized);
}

TEST_CASE("constant features normalize to zero") {
    dataset ds = single_feature_dataset({7.0, 7.0, 7.0}, {0, 1, 0});
    const dataset out = apply_normalizer(fit_normalizer(ds), ds);
    for (std::size_t i = 0; i < 3; ++i) CHECK(out.X(i, 0) == 0.0);
}

TEST_CASE("applying a normalizer twice equals applying it once") {
    rng r(12);
    dataset ds;
    ds.X = matrix(20, 3);
    for (double& v : ds.X.data) v = r.uniform(-5.0, 9.0);
    ds.y.assign(20, 0);
    for (std::size_t i = 0; i < 10; ++i) ds.y[i] = 1;
    ds.feature_names = {"a", "b", "c"};
    ds.split.assign(20, split_tag::train);

    const normalization_model model = fit_normalizer(ds);
    const dataset once = apply_normalizer(model, ds);
    const dataset twice = apply_normalizer(model, once);
    CHECK(once.X.data == twice.X.data);
}

TEST_CASE("normalizer width must match the dataset") {
    dataset ds = single_feature_dataset({1.0, 2.0}, {0, 1});
    normalization_model model;
    model.feature_min = {0.0, 0.0};
    model.feature_max = {1.0, 1.0};
    CHECK_THROWS_AS(apply_normalizer(model, ds), shape_error);
    normalization_model crossed;
    crossed.feature_min = {2.0};
    crossed.feature_max = {1.0};
    CHECK_THROWS_AS(apply_normalizer(crossed, ds), data_error);
}

TEST_CASE("stratified split reproduces the published per-class counts") {
    const std::size_t n_attack = 45332, n_benign = 37000;
    dataset ds;
    ds.X = matrix(n_attack + n_benign, 1);
    ds.y.assign(n_attack + n_benign, 0);
    for (std::size_t i = 0; i < n_attack; ++i) ds.y[i] = 1;
    ds.feature_names = {"f0"};
    ds.split.assign(ds.n_rows(), split_tag::train);

    const dataset out = split_dataset(ds, 0.6, 0.2, 42);
    const std::size_t attack_train = out.rows_with(split_tag::train, 1).size();
    const std::size_t benign_train = out.rows_with(split_tag::train, 0).size();
    CHECK(attack_train >= 27198);
    CHECK(attack_train <= 27200);
    CHECK(benign_train == 22200);

    // every row has exactly one tag by construction; check exhaustiveness
    const std::size_t total = out.rows_with_tag(split_tag::train).size() +
                              out.rows_with_tag(split_tag::val).size() +
                              out.rows_with_tag(split_tag::test).size();
    CHECK(total == ds.n_rows());
}

TEST_CASE("split fractions land within one row per class") {
    rng r(9);
    dataset ds;
    const std::size_t n = 1013;
    ds.X = matrix(n, 1);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) ds.y[i] = static_cast<int>(r.uniform_index(2));
    ds.feature_names = {"f0"};
    ds.split.assign(n, split_tag::train);

    const dataset out = split_dataset(ds, 0.6, 0.2, 7);
    for (const int label : {0, 1}) {
        std::size_t n_class = 0;
        for (const int v : out.y)
            if (v == label) ++n_class;
        const double train_frac =
            static_cast<double>(out.rows_with(split_tag::train, label).size()) /
            static_cast<double>(n_class);
        CHECK(std::abs(train_frac - 0.6) <= 1.0 / static_cast<double>(n_class));
    }
}

TEST_CASE("split is deterministic in the seed") {
    dataset ds;
    ds.X = matrix(50, 1);
    ds.y.assign(50, 0);
    for (std::size_t i = 0; i < 25; ++i) ds.y[i] = 1;
    ds.feature_names = {"f0"};
    ds.split.assign(50, split_tag::train);

    const dataset a = split_dataset(ds, 0.5, 0.25, 11);
    const dataset b = split_dataset(ds, 0.5, 0.25, 11);
    const dataset c = split_dataset(ds, 0.5, 0.25, 12);
    CHECK(a.split == b.split);
    CHECK(a.split != c.split);
}

TEST_CASE("split rejects fractions that overflow") {
    dataset ds = single_feature_dataset({1.0, 2.0}, {0, 1});
    CHECK_THROWS_AS(split_dataset(ds, 0.8, 0.3, 0), config_error);
    CHECK_THROWS_AS(split_dataset(ds, 0.0, 0.5, 0), config_error);
}

TEST_CASE("synthetic generation is deterministic and box-bounded") {
    synth_config cfg;
    cfg.n_features = 6;
    cfg.n_attack = 40;
    cfg.n_benign = 30;
    cfg.class_separation = 3.0;
    cfg.seed = 5;

    const dataset a = synth_generate(cfg);
    const dataset b = synth_generate(cfg);
    CHECK(a.X.data == b.X.data);
    CHECK(a.y == b.y);

    REQUIRE(a.n_rows() == 70);
    CHECK(a.normalized);
    CHECK(a.n_features() == 6);
    std::size_t n_attack = 0;
    for (const int v : a.y) n_attack += static_cast<std::size_t>(v);
    CHECK(n_attack == 40);
    for (const double v : a.X.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    cfg.seed = 6;
    const dataset c = synth_generate(cfg);
    CHECK(a.X.data != c.X.data);
}

TEST_CASE("class separation controls how well a centroid classifier does") {
    const auto centroid_accuracy = [](double separation) {
        synth_config cfg;
        cfg.n_features = 16;
        cfg.n_attack = 1500;
        cfg.n_benign = 1500;
        cfg.class_separation = separation;
        cfg.seed = 77;
        dataset ds = synth_generate(cfg);
        ds = split_dataset(ds, 0.6, 0.2, 13);

        std::vector<double> mean0(ds.n_features(), 0.0), mean1(ds.n_features(), 0.0);
        const auto train0 = ds.rows_with(split_tag::train, 0);
        const auto train1 = ds.rows_with(split_tag::train, 1);
        for (const std::size_t i : train0)
            for (std::size_t j = 0; j < ds.n_features(); ++j) mean0[j] += ds.X(i, j);
        for (const std::size_t i : train1)
            for (std::size_t j = 0; j < ds.n_features(); ++j) mean1[j] += ds.X(i, j);
        for (std::size_t j = 0; j < ds.n_features(); ++j) {
            mean0[j] /= static_cast<double>(train0.size());
            mean1[j] /= static_cast<double>(train1.size());
        }

        const auto test_rows = ds.rows_with_tag(split_tag::test);
        std::size_t correct = 0;
        for (const std::size_t i : test_rows) {
            double d0 = 0.0, d1 = 0.0;
            for (std::size_t j = 0; j < ds.n_features(); ++j) {
                d0 += (ds.X(i, j) - mean0[j]) * (ds.X(i, j) - mean0[j]);
                d1 += (ds.X(i, j) - mean1[j]) * (ds.X(i, j) - mean1[j]);
            }
            const int pred = (d1 < d0) ? 1 : 0;
            if (pred == ds.y[i]) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(test_rows.size());
    };

    CHECK(centroid_accuracy(0.0) == Catch::Approx(0.5).margin(0.06));
    CHECK(centroid_accuracy(6.0) >= 0.95);
}

TEST_CASE("dataset validation catches inconsistencies") {
    dataset ds = single_feature_dataset({0.5, 0.7}, {0, 1});
    ds.validate();

    dataset bad_label = ds;
    bad_label.y[0] = 3;
    CHECK_THROWS_AS(bad_label.validate(), data_error);

    dataset short_split = ds;
    short_split.split.pop_back();
    CHECK_THROWS_AS(short_split.validate(), shape_error);

    dataset out_of_box = ds;
    out_of_box.X(0, 0) = 1.5;
    out_of_box.normalized = true;
    CHECK_THROWS_AS(out_of_box.validate(), data_error);
}

TEST_CASE("subset keeps rows, labels and tags aligned") {
    dataset ds = single_feature_dataset({0.1, 0.2, 0.3, 0.4}, {0, 1, 1, 0});
    ds.split = {split_tag::train, split_tag::val, split_tag::test, split_tag::train};
    const dataset out = ds.subset({2, 0});
    CHECK(out.X.data == std::vector<double>{0.3, 0.1});
    CHECK(out.y == std::vector<int>{1, 0});
    CHECK(out.split == std::vector<split_tag>{split_tag::test, split_tag::train});
}

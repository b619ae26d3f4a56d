// Command-line front end: prepare data, train the five detector variants,
// evaluate the attack-vs-model evasion grid, and inspect perturbations.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "advids/advids.hpp"

namespace {

// exit codes: 0 ok, 2 usage/config, 3 io/schema, 4 numeric failure
constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_io = 3;
constexpr int exit_numeric = 4;

struct cli_state {
    // shared
    std::string preset;
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    // prep
    std::string csv_path;
    std::string label_column = "label";
    std::string positive_label = "1";
    bool one_hot = false;
    std::string features;  // integer k, or a path to a one-name-per-line file
    double pca_threshold = 0.95;
    double train_frac = 0.6;
    double val_frac = 0.2;

    // synthetic source
    std::size_t synth_features = 16;
    std::size_t synth_attack = 2000;
    std::size_t synth_benign = 2000;
    double separation = 4.0;
    double noise = 1.0;

    // train
    std::string method;
    int epochs = 100;
    std::size_t batch = 100;
    double lr = 0.01;
    int patience = 10;
    bool augment = false;
    std::string hidden;

    // attack
    double epsilon = 0.1;
    double step = 0.01;
    int iterations = 50;

    // attack-dump / synth
    std::size_t count = 10;
    std::string out_file;
};

std::vector<std::size_t> parse_hidden(const std::string& text) {
    std::vector<std::size_t> sizes;
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, ',')) {
        if (cell.empty()) continue;
        long long v;
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || v <= 0)
            throw advids::config_error("--hidden: '" + cell + "' is not a positive integer");
        sizes.push_back(static_cast<std::size_t>(v));
    }
    if (sizes.empty()) throw advids::config_error("--hidden: no layer sizes given");
    return sizes;
}

// --features takes either a count (top-k by information gain) or a file of
// feature names, one per line
void apply_features_flag(advids::experiment_config& cfg, const std::string& value) {
    bool digits = !value.empty();
    for (const char c : value)
        if (!std::isdigit(static_cast<unsigned char>(c))) digits = false;
    if (digits) {
        cfg.top_features = static_cast<std::size_t>(std::stoull(value));
        if (cfg.top_features == 0) throw advids::config_error("--features: need k >= 1");
        return;
    }
    std::ifstream in(value);
    if (!in) throw advids::io_error("--features: cannot open list file '" + value + "'");
    std::string line;
    cfg.feature_list.clear();
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) cfg.feature_list.push_back(line);
    }
    if (cfg.feature_list.empty())
        throw advids::io_error("--features: list file '" + value + "' has no names");
}

// Start from the preset (or plain defaults) and let every flag the user
// actually passed override it; untouched flags keep the preset's values.
advids::experiment_config build_config(const CLI::App& root, const CLI::App& sub,
                                       const cli_state& st) {
    advids::experiment_config cfg =
        st.preset.empty() ? advids::experiment_config{} : advids::preset_by_name(st.preset);

    cfg.seed = st.seed;
    cfg.out_dir = st.out_dir;
    cfg.csv_path = st.csv_path;
    cfg.label_column = st.label_column;
    cfg.positive_label = st.positive_label;
    cfg.encoding = st.one_hot ? advids::categorical_encoding::onehot
                              : advids::categorical_encoding::ordinal;
    cfg.train_fraction = st.train_frac;
    cfg.val_fraction = st.val_frac;
    cfg.synth.n_features = st.synth_features;
    cfg.synth.n_attack = st.synth_attack;
    cfg.synth.n_benign = st.synth_benign;
    cfg.synth.class_separation = st.separation;
    cfg.synth.noise_scale = st.noise;

    const auto set = [&](const std::string& flag) {
        for (const CLI::App* a : {&sub, &root}) {
            const CLI::Option* opt = a->get_option_no_throw(flag);
            if (opt && opt->count() > 0) return true;
        }
        return false;
    };
    if (set("--features")) apply_features_flag(cfg, st.features);
    if (set("--pca")) {
        cfg.use_pca = true;
        cfg.pca_threshold = st.pca_threshold;
    }
    if (set("--epochs")) cfg.train.epochs = st.epochs;
    if (set("--batch")) cfg.train.batch_size = st.batch;
    if (set("--lr")) cfg.train.learning_rate = st.lr;
    if (set("--patience")) cfg.train.convergence_patience = st.patience;
    if (set("--augment")) cfg.train.augment = st.augment;
    if (set("--hidden")) cfg.hidden_layers = parse_hidden(st.hidden);
    if (set("--epsilon")) cfg.train.attack.epsilon = st.epsilon;
    if (set("--step")) cfg.train.attack.step_size = st.step;
    if (set("--iterations")) cfg.train.attack.iterations = st.iterations;
    return cfg;
}

void add_attack_flags(CLI::App& sub, cli_state& st) {
    sub.add_option("--epsilon", st.epsilon, "sup-norm perturbation budget");
    sub.add_option("--step", st.step, "per-iteration step size");
    sub.add_option("--iterations", st.iterations, "inner ascent iterations");
}

}  // namespace

int main(int argc, char** argv) {
    cli_state st;
    CLI::App app("adversarial training workbench for dense network intrusion detectors");
    app.set_config("--config", "", "INI config file; sections name subcommands");
    app.require_subcommand(1);
    app.add_option("-s,--seed", st.seed, "root seed; all randomness derives from it");
    app.add_option("-o,--out", st.out_dir, "artifact directory")->capture_default_str();
    app.add_option("-p,--preset", st.preset, "experiment1 or experiment2")
        ->check(CLI::IsMember({"experiment1", "experiment2"}));

    CLI::App* prep = app.add_subcommand("prep", "load or generate data, select features, "
                                                "normalize, optionally project");
    prep->add_option("--csv", st.csv_path, "source CSV; omit to use the synthetic generator");
    prep->add_option("--label-column", st.label_column, "name of the label column")
        ->capture_default_str();
    prep->add_option("--positive-label", st.positive_label, "label value marking attack rows")
        ->capture_default_str();
    prep->add_flag("--one-hot", st.one_hot, "one-hot encode categorical columns");
    prep->add_option("--features", st.features, "keep top-k features, or names from a file");
    prep->add_option("--pca", st.pca_threshold,
                     "project onto the fewest components explaining this variance ratio");
    prep->add_option("--train-frac", st.train_frac, "training fraction")->capture_default_str();
    prep->add_option("--val-frac", st.val_frac, "validation fraction")->capture_default_str();
    prep->add_option("--synth-features", st.synth_features, "synthetic: feature count")
        ->capture_default_str();
    prep->add_option("--synth-attack", st.synth_attack, "synthetic: attack rows")
        ->capture_default_str();
    prep->add_option("--synth-benign", st.synth_benign, "synthetic: benign rows")
        ->capture_default_str();
    prep->add_option("--separation", st.separation, "synthetic: class mean separation")
        ->capture_default_str();
    prep->add_option("--noise", st.noise, "synthetic: noise scale")->capture_default_str();

    CLI::App* train = app.add_subcommand("train", "train one detector with an inner attack");
    train->add_option("-m,--method", st.method, "natural, dfgsm, rfgsm, bga or bca")
        ->required();
    train->add_option("--epochs", st.epochs, "maximum epochs");
    train->add_option("--batch", st.batch, "minibatch size");
    train->add_option("--lr", st.lr, "learning rate");
    train->add_option("--patience", st.patience, "early-stop patience in epochs");
    train->add_flag("--augment", st.augment, "append adversarial rows instead of replacing");
    train->add_option("--hidden", st.hidden, "hidden layer sizes, e.g. 300,100,40");
    add_attack_flags(*train, st);

    CLI::App* matrix = app.add_subcommand("matrix", "evasion grid of every attack against "
                                                    "every trained model");
    add_attack_flags(*matrix, st);

    CLI::App* dump = app.add_subcommand("attack-dump", "write original/adversarial row pairs "
                                                       "against the natural model");
    dump->add_option("-m,--method", st.method, "dfgsm, rfgsm, bga, bca or natural")->required();
    dump->add_option("-n,--count", st.count, "number of attack test rows to perturb")
        ->capture_default_str();
    add_attack_flags(*dump, st);

    CLI::App* synth = app.add_subcommand("synth", "write a raw synthetic source CSV");
    synth->add_option("--out-file", st.out_file, "output path; default <out>/synth.csv");
    synth->add_option("--synth-features", st.synth_features, "feature count")
        ->capture_default_str();
    synth->add_option("--synth-attack", st.synth_attack, "attack rows")->capture_default_str();
    synth->add_option("--synth-benign", st.synth_benign, "benign rows")->capture_default_str();
    synth->add_option("--separation", st.separation, "class mean separation")
        ->capture_default_str();
    synth->add_option("--noise", st.noise, "noise scale")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exits 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message
        return exit_usage;
    }

    try {
        if (prep->parsed()) {
            advids::run_prep(build_config(app, *prep, st));
        } else if (train->parsed()) {
            advids::run_train(build_config(app, *train, st), st.method);
        } else if (matrix->parsed()) {
            advids::run_matrix(build_config(app, *matrix, st));
        } else if (dump->parsed()) {
            advids::run_attack_dump(build_config(app, *dump, st), st.method, st.count);
        } else if (synth->parsed()) {
            const advids::experiment_config cfg = build_config(app, *synth, st);
            advids::synth_config sc = cfg.synth;
            sc.seed = advids::derive_seed(cfg.seed, "synth");
            const std::string path =
                st.out_file.empty() ? cfg.out_dir + "/synth.csv" : st.out_file;
            advids::run_synth(sc, path);
        }
    } catch (const advids::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const advids::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const advids::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const advids::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const advids::shape_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const advids::divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const advids::numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
    return exit_ok;
}

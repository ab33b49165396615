// Command-line driver: weight computation, dataset generation, training,
// evaluation, and gradient checking as batch jobs with JSON outputs.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvae/datagen.hpp"
#include "cvae/errors.hpp"
#include "cvae/evalmetrics.hpp"
#include "cvae/graph.hpp"
#include "cvae/io.hpp"
#include "cvae/model.hpp"
#include "cvae/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct CliExit {
    int code;
    std::string message;
};

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw CliExit{kExitIo, "cannot create output directory: " + dir};
    }
}

int cmd_weights(const std::string& graph_path, const std::string& out_path) {
    cvae::Graph g = cvae::read_graph_file(graph_path);
    cvae::EdgeWeightMap w = cvae::mas_edge_weights(g);
    cvae::write_file_atomic(out_path, cvae::edge_weights_to_json(g, w) + "\n");
    std::cout << "wrote " << out_path << " (" << w.weights.size() << " edges, sum " << w.sum()
              << ")\n";
    return 0;
}

struct GenerateTreeOpts {
    std::size_t n = 500, data_dim = 50, latent_dim = 8;
    double tau = 0.99;
    std::uint64_t seed = 0;
    std::string out_dir;
};

int cmd_generate_tree(const GenerateTreeOpts& o) {
    if (o.n < 2) throw CliExit{kExitValidation, "tree-gmm: n must be >= 2"};
    if (!(o.tau > 0 && o.tau < 1)) throw CliExit{kExitValidation, "tree-gmm: tau must be in (0,1)"};
    cvae::SyntheticDataset ds =
        cvae::gen_tree_dataset(o.n, o.data_dim, o.latent_dim, o.tau, o.seed);
    ensure_out_dir(o.out_dir);
    fs::path dir(o.out_dir);
    cvae::write_file_atomic((dir / "data.tsv").string(), cvae::matrix_to_tsv(ds.x));
    cvae::write_file_atomic((dir / "graph.txt").string(), cvae::graph_to_text(ds.graph));
    cvae::write_file_atomic((dir / "labels.txt").string(), cvae::labels_to_text(ds.labels));
    cvae::write_file_atomic((dir / "ztrue.tsv").string(), cvae::matrix_to_tsv(ds.z_true));
    json manifest = {{"kind", "tree-gmm"}, {"n", o.n},     {"D", o.data_dim},
                     {"d", o.latent_dim}, {"tau", o.tau},  {"seed", o.seed}};
    cvae::write_file_atomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << "wrote tree-gmm dataset to " << o.out_dir << "\n";
    return 0;
}

int cmd_generate_dual(const std::string& matrix_path, std::uint64_t seed,
                      const std::string& out_dir) {
    cvae::DataMatrix x = cvae::read_matrix_file(matrix_path);
    cvae::DualUserDataset ds = cvae::split_dual_users(x, seed);
    ensure_out_dir(out_dir);
    fs::path dir(out_dir);
    cvae::DataMatrix combined = ds.xa;
    combined.insert(combined.end(), ds.xb.begin(), ds.xb.end());
    cvae::write_file_atomic((dir / "data.tsv").string(), cvae::matrix_to_tsv(combined));
    cvae::write_file_atomic((dir / "graph.txt").string(), cvae::graph_to_text(ds.graph));
    std::string pairing = "n " + std::to_string(2 * ds.xa.size()) + "\n";
    for (std::size_t i = 0; i < ds.xa.size(); ++i) {
        pairing += std::to_string(i) + " " + std::to_string(ds.xa.size() + i) + "\n";
    }
    cvae::write_file_atomic((dir / "pairing.txt").string(), pairing);
    json manifest = {{"kind", "dual-split"},
                     {"rows", x.size()},
                     {"skipped_rows", ds.skipped_rows},
                     {"seed", seed}};
    cvae::write_file_atomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << "wrote dual-split dataset to " << out_dir << " (" << ds.skipped_rows.size()
              << " rows skipped)\n";
    return 0;
}

struct TrainOpts {
    std::string data_path, graph_path, out_dir;
    std::string variant = "vae";
    std::string likelihood = "bernoulli";
    std::size_t latent_dim = 100, hidden_dim = 128, epochs = 100;
    double tau = 0.99, gamma = 1.0, lr = 1e-3;
    std::size_t b1 = 64, b2 = 256;
    std::uint64_t seed = 0;
};

int cmd_train(const TrainOpts& o) {
    cvae::DataMatrix data = cvae::read_matrix_file(o.data_path);
    cvae::Graph graph = cvae::read_graph_file(o.graph_path);
    if (graph.vertex_count() != data.size()) {
        throw CliExit{kExitValidation, "row count (" + std::to_string(data.size()) +
                                           ") does not match graph vertex count (" +
                                           std::to_string(graph.vertex_count()) + ")"};
    }
    cvae::Variant variant = cvae::variant_from_name(o.variant);
    cvae::Likelihood likelihood = cvae::likelihood_from_name(o.likelihood);

    cvae::Rng init_rng = cvae::Rng::substream(o.seed, "init");
    cvae::CvaeModel model = cvae::make_model(variant, likelihood, data[0].size(), o.latent_dim,
                                             o.hidden_dim, o.tau, init_rng);
    cvae::TrainConfig cfg;
    cfg.gamma = o.gamma;
    cfg.lr = o.lr;
    cfg.epochs = o.epochs;
    cfg.b1_singleton = o.b1;
    cfg.b2_pairwise = o.b2;
    cfg.seed = o.seed;
    cfg.hidden_dim = o.hidden_dim;

    cvae::TrainResult result;
    try {
        result = cvae::train(model, data, graph, cfg);
    } catch (const cvae::NonFiniteGradient& e) {
        throw CliExit{kExitNumerical, e.what()};
    }
    if (result.gamma_guard_exceeded) {
        std::cerr << "warning: gamma " << o.gamma << " exceeds the guard bound "
                  << result.gamma_guard_bound << "; the regularizer may dominate\n";
    }

    ensure_out_dir(o.out_dir);
    fs::path dir(o.out_dir);
    cvae::write_file_atomic((dir / "checkpoint.json").string(),
                            cvae::model_to_json(model, o.seed).dump(2) + "\n");
    cvae::write_file_atomic((dir / "trace.csv").string(), cvae::trace_to_csv(result.trace));

    cvae::EdgeWeightMap weights;
    if (variant != cvae::Variant::Vae) weights = cvae::mas_edge_weights(graph);
    cvae::Rng eval_noise = cvae::Rng::substream(o.seed, "final-eval-noise");
    cvae::NoiseMatrix noise(data.size());
    for (auto& row : noise) row = eval_noise.normals(o.latent_dim);
    cvae::ObjectiveTerms final_terms =
        cvae::full_objective(model, data, graph, weights, o.gamma, noise);

    json manifest = {{"command", "train"},   {"data", o.data_path}, {"graph", o.graph_path},
                     {"variant", o.variant}, {"likelihood", o.likelihood},
                     {"d", o.latent_dim},    {"hidden", o.hidden_dim},
                     {"tau", o.tau},         {"gamma", o.gamma},
                     {"lr", o.lr},           {"epochs", o.epochs},
                     {"b1", o.b1},           {"b2", o.b2},
                     {"seed", o.seed},       {"final_objective", final_terms.total}};
    cvae::write_file_atomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << "final full-batch objective: " << final_terms.total << "\n";
    return 0;
}

struct EvalOpts {
    std::string checkpoint, data_path, task, out_path;
    std::string pairing_path, labels_path, train_edges_path, test_edges_path;
    std::string distances_path;  // debug: inject a precomputed distance matrix
};

std::vector<cvae::Edge> read_edge_list(const std::string& path) {
    return cvae::read_graph_file(path).edges();
}

int cmd_eval(const EvalOpts& o) {
    if (o.task != "matching" && o.task != "clustering" && o.task != "linkpred") {
        throw CliExit{kExitValidation, "unknown task: " + o.task};
    }
    if (o.task == "matching" && o.pairing_path.empty()) {
        throw CliExit{kExitValidation, "matching requires --pairing"};
    }
    if (o.task == "clustering" && o.labels_path.empty()) {
        throw CliExit{kExitValidation, "clustering requires --labels"};
    }
    if (o.task == "linkpred" && (o.train_edges_path.empty() || o.test_edges_path.empty())) {
        throw CliExit{kExitValidation, "linkpred requires --train-edges and --test-edges"};
    }

    json config_echo = {{"command", "eval"}, {"task", o.task}, {"data", o.data_path},
                        {"checkpoint", o.checkpoint}};

    std::optional<cvae::DistanceMatrix> dis;
    if (!o.distances_path.empty()) {
        cvae::DataMatrix m = cvae::read_matrix_file(o.distances_path);
        cvae::DistanceMatrix d(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i].size() != m.size()) {
                throw CliExit{kExitValidation, "distance matrix must be square"};
            }
            for (std::size_t j = i + 1; j < m.size(); ++j) d.set(i, j, m[i][j]);
        }
        dis = std::move(d);
        config_echo["distances"] = o.distances_path;
    } else {
        if (o.checkpoint.empty()) {
            throw CliExit{kExitValidation, "need --checkpoint (or --distances for debugging)"};
        }
        cvae::CvaeModel model = cvae::model_from_json(json::parse(cvae::read_file(o.checkpoint)));
        cvae::DataMatrix data = cvae::read_matrix_file(o.data_path);
        auto mode = model.variant == cvae::Variant::CvaeCorr ? cvae::DistanceMode::Correlated
                                                             : cvae::DistanceMode::Independent;
        dis = cvae::distance_matrix(model, data, mode);
        config_echo["mode"] =
            mode == cvae::DistanceMode::Correlated ? "correlated" : "independent";
    }

    cvae::EvalReport report;
    std::vector<int> predicted;
    if (o.task == "matching") {
        std::vector<std::size_t> pairing(dis->size(), 0);
        for (const auto& [a, b] : read_edge_list(o.pairing_path)) {
            if (a >= pairing.size() || b >= pairing.size()) {
                throw CliExit{kExitValidation, "pairing index out of range"};
            }
            pairing[a] = b;
            pairing[b] = a;
        }
        report = cvae::matching_rr(*dis, pairing);
    } else if (o.task == "clustering") {
        std::vector<int> truth = cvae::read_labels_file(o.labels_path);
        if (truth.size() != dis->size()) {
            throw CliExit{kExitValidation, "label count does not match data rows"};
        }
        predicted = cvae::spectral_cluster(*dis);
        report.metric = "clustering_nmi";
        report.value = cvae::nmi(predicted, truth);
    } else {
        report = cvae::ncrr(*dis, read_edge_list(o.train_edges_path),
                            read_edge_list(o.test_edges_path));
    }

    cvae::write_file_atomic(o.out_path, cvae::report_to_json(report, config_echo.dump()) + "\n");
    if (o.task == "clustering") {
        cvae::write_file_atomic(o.out_path + ".labels", cvae::labels_to_text(predicted));
    }
    std::cout << report.metric << ": " << report.value << "\n";
    return 0;
}

int cmd_gradcheck(const std::string& variant_name, std::uint64_t seed) {
    cvae::Variant variant = cvae::variant_from_name(variant_name);
    const std::size_t n = 6, D = 8, d = 3, hidden = 5;

    cvae::Rng data_rng = cvae::Rng::substream(seed, "gradcheck-data");
    cvae::DataMatrix data(n, std::vector<double>(D));
    for (auto& row : data)
        for (double& v : row) v = data_rng.uniform() < 0.5 ? 0.0 : 1.0;
    cvae::Graph graph(n, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}, {4, 5}, {5, 3}});
    cvae::EdgeWeightMap weights = cvae::mas_edge_weights(graph);

    cvae::Rng init_rng = cvae::Rng::substream(seed, "init");
    cvae::CvaeModel model = cvae::make_model(variant, cvae::Likelihood::Bernoulli, D, d, hidden,
                                             0.9, init_rng);
    cvae::Rng noise_rng = cvae::Rng::substream(seed, "noise");
    cvae::NoiseMatrix noise(n);
    for (auto& row : noise) row = noise_rng.normals(d);
    const double gamma = 0.5;

    cvae::ModelGrads grads(model);
    cvae::full_objective(model, data, graph, weights, gamma, noise, &grads);

    cvae::CvaeModel probe = model;
    auto loss_fn = [&](const std::vector<double>& p) {
        cvae::unflatten_params(probe, p);
        return cvae::full_objective(probe, data, graph, weights, gamma, noise).total;
    };
    cvae::GradCheckReport rep =
        cvae::grad_check(loss_fn, cvae::flatten_params(model), grads.flatten());

    json out = {{"variant", variant_name}, {"seed", seed},
                {"max_rel_error", rep.max_rel_error}, {"worst_index", rep.worst_index}};
    std::cout << out.dump(2) << "\n";
    return rep.max_rel_error < 1e-4 ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlated variational auto-encoders on graph-structured data"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file (flags take precedence)");

    std::uint64_t seed = 0;
    auto add_seed = [&seed](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "base RNG seed")->capture_default_str();
    };

    // weights
    auto* weights_cmd = app.add_subcommand("weights", "compute per-edge spanning-tree fractions");
    std::string w_graph, w_out = "weights.json";
    weights_cmd->add_option("graph", w_graph, "graph file")->required();
    weights_cmd->add_option("--out", w_out, "output JSON path")->capture_default_str();

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "generate synthetic datasets");
    gen_cmd->require_subcommand(1);
    auto* tree_cmd = gen_cmd->add_subcommand("tree-gmm", "tree-structured latent Gaussian data");
    GenerateTreeOpts tree_opts;
    tree_cmd->add_option("--n", tree_opts.n)->capture_default_str();
    tree_cmd->add_option("--D", tree_opts.data_dim)->capture_default_str();
    tree_cmd->add_option("--d", tree_opts.latent_dim)->capture_default_str();
    tree_cmd->add_option("--tau", tree_opts.tau)->capture_default_str();
    tree_cmd->add_option("--out", tree_opts.out_dir, "output directory")->required();
    add_seed(tree_cmd);
    auto* dual_cmd = gen_cmd->add_subcommand("dual-split", "split rows into dual user pairs");
    std::string dual_matrix, dual_out;
    dual_cmd->add_option("--matrix", dual_matrix, "input TSV matrix")->required();
    dual_cmd->add_option("--out", dual_out, "output directory")->required();
    add_seed(dual_cmd);

    // train
    auto* train_cmd = app.add_subcommand("train", "train a model");
    TrainOpts train_opts;
    train_cmd->add_option("--data", train_opts.data_path, "TSV data matrix")->required();
    train_cmd->add_option("--graph", train_opts.graph_path, "correlation graph file")->required();
    train_cmd->add_option("--variant", train_opts.variant, "vae | cvae_ind | cvae_corr")
        ->capture_default_str();
    train_cmd->add_option("--likelihood", train_opts.likelihood, "bernoulli | multinomial")
        ->capture_default_str();
    train_cmd->add_option("--d", train_opts.latent_dim)->capture_default_str();
    train_cmd->add_option("--hidden", train_opts.hidden_dim)->capture_default_str();
    train_cmd->add_option("--tau", train_opts.tau)->capture_default_str();
    train_cmd->add_option("--gamma", train_opts.gamma)->capture_default_str();
    train_cmd->add_option("--lr", train_opts.lr)->capture_default_str();
    train_cmd->add_option("--epochs", train_opts.epochs)->capture_default_str();
    train_cmd->add_option("--b1", train_opts.b1)->capture_default_str();
    train_cmd->add_option("--b2", train_opts.b2)->capture_default_str();
    train_cmd->add_option("--out", train_opts.out_dir, "output directory")->required();
    add_seed(train_cmd);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    EvalOpts eval_opts;
    eval_cmd->add_option("--checkpoint", eval_opts.checkpoint, "checkpoint JSON");
    eval_cmd->add_option("--data", eval_opts.data_path, "TSV data matrix");
    eval_cmd->add_option("--task", eval_opts.task, "matching | clustering | linkpred")->required();
    eval_cmd->add_option("--pairing", eval_opts.pairing_path, "dual pairing file (graph format)");
    eval_cmd->add_option("--labels", eval_opts.labels_path, "true labels file");
    eval_cmd->add_option("--train-edges", eval_opts.train_edges_path, "train edges (graph format)");
    eval_cmd->add_option("--test-edges", eval_opts.test_edges_path, "test edges (graph format)");
    eval_cmd->add_option("--distances", eval_opts.distances_path,
                         "debug: TSV distance matrix instead of a checkpoint");
    eval_cmd->add_option("--out", eval_opts.out_path, "report JSON path")->required();

    // gradcheck
    auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::string gc_variant = "cvae_corr";
    gc_cmd->add_option("--variant", gc_variant)->capture_default_str();
    add_seed(gc_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (weights_cmd->parsed()) return cmd_weights(w_graph, w_out);
        if (tree_cmd->parsed()) {
            tree_opts.seed = seed;
            return cmd_generate_tree(tree_opts);
        }
        if (dual_cmd->parsed()) return cmd_generate_dual(dual_matrix, seed, dual_out);
        if (train_cmd->parsed()) {
            train_opts.seed = seed;
            return cmd_train(train_opts);
        }
        if (eval_cmd->parsed()) return cmd_eval(eval_opts);
        if (gc_cmd->parsed()) return cmd_gradcheck(gc_variant, seed);
    } catch (const CliExit& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const cvae::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const cvae::NonFiniteGradient& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}

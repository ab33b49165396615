#include "cvae/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cvae/errors.hpp"
#include "cvae/nn.hpp"
#include "cvae/numerics.hpp"
#include "cvae/rng.hpp"

namespace cvae {

std::pair<Graph, std::vector<std::vector<double>>> sample_tree_gmm(std::size_t n, std::size_t d,
                                                                   double tau,
                                                                   std::uint64_t seed) {
    if (n < 2) throw InvalidInput("sample_tree_gmm: n must be >= 2");
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("sample_tree_gmm: tau must be in (0,1)");

    Rng tree_rng = Rng::substream(seed, "tree-shape");
    std::vector<Edge> edges;
    std::vector<std::size_t> parent(n, 0);
    for (std::size_t v = 1; v < n; ++v) {
        parent[v] = static_cast<std::size_t>(tree_rng.below(v));
        edges.emplace_back(parent[v], v);
    }
    Graph tree(n, edges);

    Rng z_rng = Rng::substream(seed, "tree-latents");
    std::vector<std::vector<double>> z(n, std::vector<double>(d));
    double cond_sd = std::sqrt(1.0 - tau * tau);
    // vertex t always attaches to an earlier vertex, so index order is BFS-safe
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t k = 0; k < d; ++k) {
            double eps = z_rng.normal();
            z[v][k] = (v == 0) ? eps : tau * z[parent[v]][k] + cond_sd * eps;
        }
    }
    return {std::move(tree), std::move(z)};
}

DataMatrix decode_with_net(const Mlp& net, const std::vector<std::vector<double>>& z,
                           std::uint64_t seed) {
    if (z.empty()) throw InvalidInput("decode_with_net: empty z");
    std::size_t data_dim = net.out_dim;
    Rng flip_rng = Rng::substream(seed, "bernoulli-flips");
    DataMatrix x(z.size(), std::vector<double>(data_dim));
    for (std::size_t i = 0; i < z.size(); ++i) {
        std::vector<double> logits = forward(net, z[i]);
        for (std::size_t k = 0; k < data_dim; ++k) {
            double p = 1.0 / (1.0 + std::exp(-logits[k]));
            x[i][k] = flip_rng.uniform() < p ? 1.0 : 0.0;
        }
    }
    return x;
}

DataMatrix decode_to_bernoulli(const std::vector<std::vector<double>>& z, std::size_t data_dim,
                               std::uint64_t seed) {
    if (z.empty()) throw InvalidInput("decode_to_bernoulli: empty z");
    Rng net_rng = Rng::substream(seed, "decoder-net");
    Mlp net = make_mlp(z[0].size(), 32, data_dim, Activation::Tanh, net_rng);
    // zero biases keep rows near density 1/2; widen the output weights so the
    // logits actually separate the latent clusters
    for (double& w : net.w2) w *= 4.0;
    return decode_with_net(net, z, seed);
}

std::vector<int> make_labels(const std::vector<std::vector<double>>& z) {
    const std::size_t n = z.size();
    PrincipalComponent pc = first_principal_component(z);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pc.scores[a] != pc.scores[b]) return pc.scores[a] < pc.scores[b];
        return a < b;
    });
    std::size_t ones = (n + 1) / 2;
    std::vector<int> labels(n, 0);
    for (std::size_t r = n - ones; r < n; ++r) labels[order[r]] = 1;
    return labels;
}

SyntheticDataset gen_tree_dataset(std::size_t n, std::size_t data_dim, std::size_t latent_dim,
                                  double tau, std::uint64_t seed) {
    auto [tree, z] = sample_tree_gmm(n, latent_dim, tau, seed);
    SyntheticDataset ds{decode_to_bernoulli(z, data_dim, seed), z, make_labels(z),
                        std::move(tree), seed};
    return ds;
}

DualUserDataset split_dual_users(const DataMatrix& x, std::uint64_t seed) {
    const std::size_t m = x.size();
    if (m == 0) throw InvalidInput("split_dual_users: empty matrix");
    const std::size_t D = x[0].size();
    Rng rng = Rng::substream(seed, "dual-split");

    DualUserDataset out{DataMatrix(m, std::vector<double>(D, 0.0)),
                        DataMatrix(m, std::vector<double>(D, 0.0)), Graph(2 * m), {}};
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::size_t> support;
        for (std::size_t k = 0; k < D; ++k) {
            if (x[i][k] != 0.0) support.push_back(k);
        }
        if (support.size() < 2) {
            out.skipped_rows.push_back(i);
            continue;
        }
        std::size_t half_b = support.size() / 2;  // A gets the extra on odd counts
        auto pick = rng.sample_without_replacement(support.size(), half_b);
        std::vector<bool> to_b(support.size(), false);
        for (std::size_t p : pick) to_b[p] = true;
        for (std::size_t s = 0; s < support.size(); ++s) {
            (to_b[s] ? out.xb : out.xa)[i][support[s]] = x[i][support[s]];
        }
        edges.emplace_back(i, m + i);
    }
    out.graph = Graph(2 * m, edges);
    return out;
}

std::string matrix_to_tsv(const DataMatrix& x) {
    std::ostringstream out;
    out.precision(12);
    for (const auto& row : x) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out << '\t';
            if (row[k] == std::floor(row[k]) && std::abs(row[k]) < 1e15) {
                out << static_cast<long long>(row[k]);
            } else {
                out << row[k];
            }
        }
        out << '\n';
    }
    return out.str();
}

DataMatrix matrix_from_tsv(const std::string& text) {
    DataMatrix x;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (!ls.eof()) {
            throw InvalidInput("matrix line " + std::to_string(lineno) + ": non-numeric token");
        }
        if (!x.empty() && row.size() != x[0].size()) {
            throw InvalidInput("matrix line " + std::to_string(lineno) + ": ragged row");
        }
        x.push_back(std::move(row));
    }
    if (x.empty()) throw InvalidInput("matrix file: no rows");
    return x;
}

DataMatrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return matrix_from_tsv(buf.str());
}

std::string labels_to_text(const std::vector<int>& labels) {
    std::ostringstream out;
    for (int l : labels) out << l << '\n';
    return out.str();
}

std::vector<int> read_labels_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open labels file: " + path);
    std::vector<int> labels;
    int v;
    while (in >> v) labels.push_back(v);
    if (labels.empty()) throw InvalidInput("labels file is empty: " + path);
    return labels;
}

}  // namespace cvae

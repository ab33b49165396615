#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvae/graph.hpp"
#include "cvae/model.hpp"

namespace cvae {

struct SyntheticDataset {
    DataMatrix x;                       // n x D binary
    std::vector<std::vector<double>> z_true;  // n x d
    std::vector<int> labels;            // binary cluster labels
    Graph graph;
    std::uint64_t seed;
};

struct DualUserDataset {
    DataMatrix xa;  // m x D
    DataMatrix xb;  // m x D
    Graph graph;    // bipartite matching graph over 2m vertices: (i, m+i)
    std::vector<std::size_t> skipped_rows;  // rows with < 2 nonzeros
};

// Uniform random recursive tree; z sampled exactly from the tree-structured
// Gaussian model: root ~ N(0, I), child | parent ~ N(tau * parent, (1-tau^2) I).
std::pair<Graph, std::vector<std::vector<double>>> sample_tree_gmm(std::size_t n, std::size_t d,
                                                                   double tau,
                                                                   std::uint64_t seed);

// Fixed randomly-initialized two-layer net maps z to logits; x is element-wise
// Bernoulli. Deterministic given seed.
DataMatrix decode_to_bernoulli(const std::vector<std::vector<double>>& z, std::size_t data_dim,
                               std::uint64_t seed);

// Same, with a caller-supplied logits net.
DataMatrix decode_with_net(const Mlp& net, const std::vector<std::vector<double>>& z,
                           std::uint64_t seed);

// Label 1 for the ceil(n/2) rows with the highest first-principal-component
// scores (ties broken by row index).
std::vector<int> make_labels(const std::vector<std::vector<double>>& z);

SyntheticDataset gen_tree_dataset(std::size_t n, std::size_t data_dim, std::size_t latent_dim,
                                  double tau, std::uint64_t seed);

// Randomly partition the nonzero coordinates of each row into two halves
// (A gets the extra on odd counts). Rows with < 2 nonzeros are skipped.
DualUserDataset split_dual_users(const DataMatrix& x, std::uint64_t seed);

// TSV matrix of 0/1 (or count) entries, one row per line
std::string matrix_to_tsv(const DataMatrix& x);
DataMatrix matrix_from_tsv(const std::string& text);
DataMatrix read_matrix_file(const std::string& path);

std::string labels_to_text(const std::vector<int>& labels);
std::vector<int> read_labels_file(const std::string& path);

}  // namespace cvae

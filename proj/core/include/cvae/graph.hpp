#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cvae/numerics.hpp"

namespace cvae {

using Edge = std::pair<std::size_t, std::size_t>;  // always stored with first < second

// Undirected simple graph. Edges and adjacency lists are kept sorted so that
// iteration order (and everything seeded on top of it) is deterministic.
class Graph {
public:
    explicit Graph(std::size_t n);
    Graph(std::size_t n, const std::vector<Edge>& edges);

    std::size_t vertex_count() const { return n_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::size_t>& neighbors(std::size_t v) const { return adj_[v]; }
    std::size_t degree(std::size_t v) const { return adj_[v].size(); }
    bool has_edge(std::size_t i, std::size_t j) const;

private:
    std::size_t n_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> adj_;
};

struct EdgeWeightMap {
    std::map<Edge, double> weights;

    double sum() const;
    double at(const Edge& e) const;
};

// Parts ordered by smallest member; vertices within each part ascending.
std::vector<std::vector<std::size_t>> connected_components(const Graph& g);

// Laplacian of the subgraph induced by `vertices` (rows/cols follow the order
// given). Only edges with both endpoints in the subset contribute.
SymMatrix laplacian(const Graph& g, const std::vector<std::size_t>& vertices);
SymMatrix laplacian(const Graph& g);

// Matrix-tree count, (i,i)-cofactor rounded to the nearest integer. Returns 0
// when g is disconnected.
std::uint64_t count_spanning_trees(const Graph& g);

// Count of spanning trees containing edge e: determinant of the Laplacian
// minus rows/cols i and j.
std::uint64_t count_spanning_trees_with_edge(const Graph& g, const Edge& e);

// Per-edge maximal-acyclic-subgraph fractions, computed per connected
// component from the Laplacian pseudoinverse.
EdgeWeightMap mas_edge_weights(const Graph& g);

// Exponential test oracle: every spanning, acyclic, edge-maximal subset.
std::vector<std::vector<Edge>> enumerate_mas(const Graph& g);

struct EdgeSplit {
    std::vector<Edge> train;
    std::vector<Edge> test;
};

// Per-vertex holdout of ceil(max(1, degree/20)) incident edges into the test
// set; edges already held out for the other endpoint count toward the quota.
EdgeSplit holdout_edges(const Graph& g, std::uint64_t seed);

// Text format: header "n <count>", then one "i j" pair per line.
Graph read_graph_file(const std::string& path);
void write_graph_file(const Graph& g, const std::string& path);
Graph parse_graph_text(const std::string& text);
std::string graph_to_text(const Graph& g);

// JSON export: {"edges":[{"u":i,"v":j,"w":x},...], "sum": s, "components": k}
std::string edge_weights_to_json(const Graph& g, const EdgeWeightMap& w);

}  // namespace cvae

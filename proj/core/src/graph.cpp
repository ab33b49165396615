#include "cvae/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cvae/errors.hpp"
#include "cvae/rng.hpp"

namespace cvae {

Graph::Graph(std::size_t n) : n_(n), adj_(n) {}

Graph::Graph(std::size_t n, const std::vector<Edge>& edges) : n_(n), adj_(n) {
    edges_.reserve(edges.size());
    for (const auto& [a, b] : edges) {
        std::size_t i = std::min(a, b), j = std::max(a, b);
        if (i == j) throw InvalidInput("Graph: self-loop at vertex " + std::to_string(i));
        if (j >= n) throw InvalidInput("Graph: vertex index out of range: " + std::to_string(j));
        edges_.emplace_back(i, j);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
        throw InvalidInput("Graph: duplicate edge");
    }
    for (const auto& [i, j] : edges_) {
        adj_[i].push_back(j);
        adj_[j].push_back(i);
    }
    for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

double EdgeWeightMap::sum() const {
    double s = 0.0;
    for (const auto& [e, w] : weights) s += w;
    return s;
}

double EdgeWeightMap::at(const Edge& e) const {
    Edge key{std::min(e.first, e.second), std::max(e.first, e.second)};
    auto it = weights.find(key);
    if (it == weights.end()) throw InvalidInput("EdgeWeightMap: missing edge");
    return it->second;
}

std::vector<std::vector<std::size_t>> connected_components(const Graph& g) {
    const std::size_t n = g.vertex_count();
    std::vector<int> comp(n, -1);
    std::vector<std::vector<std::size_t>> parts;
    for (std::size_t start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        std::vector<std::size_t> part;
        std::vector<std::size_t> stack{start};
        comp[start] = static_cast<int>(parts.size());
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            part.push_back(v);
            for (std::size_t u : g.neighbors(v)) {
                if (comp[u] < 0) {
                    comp[u] = comp[start];
                    stack.push_back(u);
                }
            }
        }
        std::sort(part.begin(), part.end());
        parts.push_back(std::move(part));
    }
    return parts;
}

SymMatrix laplacian(const Graph& g, const std::vector<std::size_t>& vertices) {
    if (vertices.empty()) throw InvalidInput("laplacian: empty vertex subset");
    const std::size_t m = vertices.size();
    std::vector<std::size_t> pos(g.vertex_count(), static_cast<std::size_t>(-1));
    for (std::size_t k = 0; k < m; ++k) {
        if (vertices[k] >= g.vertex_count()) throw InvalidInput("laplacian: vertex out of range");
        pos[vertices[k]] = k;
    }
    SymMatrix l(m);
    for (const auto& [i, j] : g.edges()) {
        std::size_t a = pos[i], b = pos[j];
        if (a == static_cast<std::size_t>(-1) || b == static_cast<std::size_t>(-1)) continue;
        l.set(a, b, l(a, b) - 1.0);
        l.set(a, a, l(a, a) + 1.0);
        l.set(b, b, l(b, b) + 1.0);
    }
    return l;
}

SymMatrix laplacian(const Graph& g) {
    std::vector<std::size_t> all(g.vertex_count());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return laplacian(g, all);
}

namespace {

std::uint64_t round_tree_count(double det) {
    if (det < -0.5) throw InvalidState("spanning tree determinant is negative: " + std::to_string(det));
    double rounded = std::round(det);
    double scale = std::max(1.0, std::abs(det));
    if (std::abs(det - rounded) > 1e-6 * scale) {
        throw InvalidState("spanning tree determinant is not close to an integer: " +
                           std::to_string(det));
    }
    return static_cast<std::uint64_t>(rounded < 0 ? 0.0 : rounded);
}

SymMatrix delete_rows_cols(const SymMatrix& a, const std::vector<std::size_t>& drop) {
    const std::size_t n = a.size();
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::find(drop.begin(), drop.end(), i) == drop.end()) keep.push_back(i);
    }
    SymMatrix out(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r)
        for (std::size_t c = r; c < keep.size(); ++c) out.set(r, c, a(keep[r], keep[c]));
    return out;
}

}  // namespace

std::uint64_t count_spanning_trees(const Graph& g) {
    if (g.vertex_count() == 1) return 1;
    if (connected_components(g).size() > 1) return 0;
    SymMatrix minor = delete_rows_cols(laplacian(g), {0});
    return round_tree_count(determinant(minor));
}

std::uint64_t count_spanning_trees_with_edge(const Graph& g, const Edge& e) {
    std::size_t i = std::min(e.first, e.second), j = std::max(e.first, e.second);
    if (!g.has_edge(i, j)) throw InvalidInput("count_spanning_trees_with_edge: edge not in graph");
    if (g.vertex_count() == 2) return connected_components(g).size() == 1 ? 1 : 0;
    SymMatrix minor = delete_rows_cols(laplacian(g), {i, j});
    return round_tree_count(determinant(minor));
}

EdgeWeightMap mas_edge_weights(const Graph& g) {
    EdgeWeightMap out;
    for (const auto& comp : connected_components(g)) {
        std::vector<Edge> comp_edges;
        std::vector<std::size_t> pos(g.vertex_count(), static_cast<std::size_t>(-1));
        for (std::size_t k = 0; k < comp.size(); ++k) pos[comp[k]] = k;
        for (const auto& [i, j] : g.edges()) {
            if (pos[i] != static_cast<std::size_t>(-1) && pos[j] != static_cast<std::size_t>(-1)) {
                comp_edges.emplace_back(i, j);
            }
        }
        if (comp_edges.empty()) continue;
        if (comp_edges.size() == comp.size() - 1) {
            // acyclic component: its spanning tree is unique
            for (const auto& e : comp_edges) out.weights[e] = 1.0;
            continue;
        }
        SymMatrix lp = pinv(laplacian(g, comp));
        for (const auto& [i, j] : comp_edges) {
            std::size_t a = pos[i], b = pos[j];
            out.weights[{i, j}] = lp(a, a) - lp(a, b) - lp(b, a) + lp(b, b);
        }
    }
    return out;
}

std::vector<std::vector<Edge>> enumerate_mas(const Graph& g) {
    const auto& edges = g.edges();
    if (edges.size() > 16) throw TooLarge("enumerate_mas: more than 16 edges");
    const std::size_t n = g.vertex_count();
    const std::size_t target_size = n - connected_components(g).size();

    std::vector<std::vector<Edge>> result;
    std::vector<std::size_t> parent(n);
    for (std::uint32_t mask = 0; mask < (1u << edges.size()); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != target_size) continue;
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        auto find = [&](std::size_t v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        bool acyclic = true;
        std::vector<Edge> subset;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            if (!(mask & (1u << k))) continue;
            std::size_t ra = find(edges[k].first), rb = find(edges[k].second);
            if (ra == rb) {
                acyclic = false;
                break;
            }
            parent[ra] = rb;
            subset.push_back(edges[k]);
        }
        // an acyclic subset of size n - |CC(G)| is automatically spanning and
        // edge-maximal within each component
        if (acyclic) result.push_back(std::move(subset));
    }
    return result;
}

EdgeSplit holdout_edges(const Graph& g, std::uint64_t seed) {
    Rng rng = Rng::substream(seed, "holdout");
    const std::size_t n = g.vertex_count();
    std::map<Edge, bool> in_test;
    for (const auto& e : g.edges()) in_test[e] = false;

    for (std::size_t v = 0; v < n; ++v) {
        std::size_t deg = g.degree(v);
        if (deg == 0) continue;
        std::size_t quota = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(static_cast<double>(deg) / 20.0)));
        std::vector<Edge> incident_train;
        std::size_t already = 0;
        for (std::size_t u : g.neighbors(v)) {
            Edge e{std::min(u, v), std::max(u, v)};
            if (in_test[e])
                ++already;
            else
                incident_train.push_back(e);
        }
        if (already >= quota) continue;
        std::size_t need = std::min(quota - already, incident_train.size());
        auto pick = rng.sample_without_replacement(incident_train.size(), need);
        for (std::size_t idx : pick) in_test[incident_train[idx]] = true;
    }

    EdgeSplit out;
    for (const auto& [e, t] : in_test) {
        (t ? out.test : out.train).push_back(e);
    }
    return out;
}

Graph parse_graph_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::size_t n = 0;
    bool have_header = false;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (!have_header) {
            std::string tag;
            if (!(ls >> tag >> n) || tag != "n") {
                throw InvalidInput("graph file line " + std::to_string(lineno) +
                                   ": expected header 'n <vertex_count>'");
            }
            have_header = true;
            continue;
        }
        long long i, j;
        if (!(ls >> i >> j) || i < 0 || j < 0) {
            throw InvalidInput("graph file line " + std::to_string(lineno) +
                               ": expected edge 'i j'");
        }
        std::string rest;
        if (ls >> rest) {
            throw InvalidInput("graph file line " + std::to_string(lineno) + ": trailing tokens");
        }
        edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    if (!have_header) throw InvalidInput("graph file: missing header line");
    try {
        return Graph(n, edges);
    } catch (const InvalidInput& e) {
        throw InvalidInput(std::string("graph file: ") + e.what());
    }
}

Graph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open graph file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_graph_text(buf.str());
}

std::string graph_to_text(const Graph& g) {
    std::ostringstream out;
    out << "n " << g.vertex_count() << "\n";
    for (const auto& [i, j] : g.edges()) out << i << " " << j << "\n";
    return out.str();
}

void write_graph_file(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write graph file: " + path);
    out << graph_to_text(g);
}

std::string edge_weights_to_json(const Graph& g, const EdgeWeightMap& w) {
    nlohmann::json j;
    j["edges"] = nlohmann::json::array();
    for (const auto& [e, weight] : w.weights) {
        j["edges"].push_back({{"u", e.first}, {"v", e.second}, {"w", weight}});
    }
    j["sum"] = w.sum();
    j["components"] = connected_components(g).size();
    return j.dump(2);
}

}  // namespace cvae

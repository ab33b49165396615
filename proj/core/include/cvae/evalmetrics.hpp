#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cvae/graph.hpp"
#include "cvae/model.hpp"

namespace cvae {

enum class DistanceMode { Independent, Correlated };

// Symmetric, zero-diagonal, nonnegative.
class DistanceMatrix {
public:
    explicit DistanceMatrix(std::size_t n);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v);

private:
    std::size_t n_;
    std::vector<double> data_;
};

// Expected squared latent distance for every pair. Correlated mode reads the
// per-pair correlation from the model's pair net.
DistanceMatrix distance_matrix(const CvaeModel& model, const DataMatrix& data, DistanceMode mode);

struct EvalReport {
    std::string metric;
    double value = 0.0;
    std::vector<double> per_item;
};

// Mean reciprocal rank of each item's dual among the other 2m-1 items.
// pairing[i] is the dual index of item i (an involution without fixed points).
EvalReport matching_rr(const DistanceMatrix& dis, const std::vector<std::size_t>& pairing);

// Two-way spectral cut: similarity S = exp(-dis/2), normalized Laplacian,
// eigenvector of the second smallest eigenvalue, median threshold.
std::vector<int> spectral_cluster(const DistanceMatrix& dis);

// Normalized mutual information with geometric-mean normalization, in [0,1].
double nmi(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

// Mean normalized cumulative reciprocal rank over vertices with test edges.
EvalReport ncrr(const DistanceMatrix& dis, const std::vector<Edge>& e_train,
                const std::vector<Edge>& e_test);

std::string report_to_json(const EvalReport& report, const std::string& config_echo_json);

}  // namespace cvae

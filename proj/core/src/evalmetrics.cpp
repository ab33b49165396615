#include "cvae/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "cvae/errors.hpp"
#include "cvae/gaussian.hpp"
#include "cvae/numerics.hpp"

namespace cvae {

DistanceMatrix::DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
    if (n == 0) throw InvalidInput("DistanceMatrix: empty");
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double v) {
    if (v < -1e-12) throw InvalidInput("DistanceMatrix: negative distance");
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
}

DistanceMatrix distance_matrix(const CvaeModel& model, const DataMatrix& data, DistanceMode mode) {
    const std::size_t n = data.size();
    if (mode == DistanceMode::Correlated && model.pair_net.in_dim == 0) {
        throw InvalidInput("distance_matrix: correlated mode requires a pair net");
    }
    std::vector<DiagGaussian> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = encode(model, data[i]);

    DistanceMatrix dis(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double v;
            if (mode == DistanceMode::Correlated) {
                v = expected_sq_distance(q[i], q[j], pair_correlation(model, data[i], data[j]));
            } else {
                v = expected_sq_distance(q[i], q[j]);
            }
            dis.set(i, j, std::max(0.0, v));
        }
    }
    return dis;
}

EvalReport matching_rr(const DistanceMatrix& dis, const std::vector<std::size_t>& pairing) {
    const std::size_t n = dis.size();
    if (n == 0 || pairing.size() != n || n % 2 != 0) {
        throw InvalidInput("matching_rr: pairing must cover an even, nonzero item count");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (pairing[i] >= n || pairing[i] == i || pairing[pairing[i]] != i) {
            throw InvalidInput("matching_rr: pairing is not a fixed-point-free involution");
        }
    }
    EvalReport report;
    report.metric = "matching_rr";
    report.per_item.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t dual = pairing[i];
        double dd = dis(i, dual);
        std::size_t rank = 1;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i || k == dual) continue;
            double dk = dis(i, k);
            if (dk < dd || (dk == dd && k < dual)) ++rank;
        }
        report.per_item[i] = 1.0 / static_cast<double>(rank);
        report.value += report.per_item[i];
    }
    report.value /= static_cast<double>(n);
    return report;
}

std::vector<int> spectral_cluster(const DistanceMatrix& dis) {
    const std::size_t n = dis.size();
    if (n < 4) throw InvalidInput("spectral_cluster: need at least 4 points");

    std::vector<double> rowsum(n, 0.0);
    SymMatrix s(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double v = std::exp(-dis(i, j) / 2.0);
            s.set(i, j, v);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) rowsum[i] += s(i, j);
        if (rowsum[i] <= 0.0) throw DegenerateSimilarity("spectral_cluster: zero row sum");
    }

    SymMatrix lsym(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double v = -s(i, j) / std::sqrt(rowsum[i] * rowsum[j]);
            if (i == j) v += 1.0;
            lsym.set(i, j, v);
        }
    }

    EigenDecomp ed = sym_eigendecomp(lsym);
    const std::vector<double>& v = ed.eigenvectors[1];  // second smallest eigenvalue

    std::vector<double> sorted(v);
    std::sort(sorted.begin(), sorted.end());
    double median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) labels[i] = v[i] > median ? 1 : 0;
    return labels;
}

double nmi(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size() || labels_a.empty()) {
        throw InvalidInput("nmi: label vectors must have equal nonzero length");
    }
    const double n = static_cast<double>(labels_a.size());
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ca, cb;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        joint[{labels_a[i], labels_b[i]}] += 1.0;
        ca[labels_a[i]] += 1.0;
        cb[labels_b[i]] += 1.0;
    }
    if (ca.size() < 2 || cb.size() < 2) return 0.0;

    double ha = 0.0, hb = 0.0, mi = 0.0;
    for (const auto& [l, c] : ca) ha -= (c / n) * std::log(c / n);
    for (const auto& [l, c] : cb) hb -= (c / n) * std::log(c / n);
    for (const auto& [lab, c] : joint) {
        double pij = c / n;
        double pa = ca[lab.first] / n;
        double pb = cb[lab.second] / n;
        mi += pij * std::log(pij / (pa * pb));
    }
    double denom = std::sqrt(ha * hb);
    if (denom <= 0.0) return 0.0;
    return std::clamp(mi / denom, 0.0, 1.0);
}

EvalReport ncrr(const DistanceMatrix& dis, const std::vector<Edge>& e_train,
                const std::vector<Edge>& e_test) {
    const std::size_t n = dis.size();
    std::set<Edge> train(e_train.begin(), e_train.end());
    std::set<Edge> test(e_test.begin(), e_test.end());
    for (const auto& e : test) {
        if (train.count(e)) throw InvalidInput("ncrr: train and test edge sets overlap");
    }
    auto in_train = [&](std::size_t a, std::size_t b) {
        return train.count({std::min(a, b), std::max(a, b)}) > 0;
    };

    std::vector<std::vector<std::size_t>> test_nbrs(n);
    for (const auto& [u, v] : test) {
        if (u >= n || v >= n) throw InvalidInput("ncrr: test edge vertex out of range");
        test_nbrs[u].push_back(v);
        test_nbrs[v].push_back(u);
    }

    EvalReport report;
    report.metric = "ncrr";
    std::size_t counted = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (test_nbrs[i].empty()) continue;
        std::vector<std::size_t> candidates;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i && !in_train(i, k)) candidates.push_back(k);
        }
        if (candidates.empty()) continue;  // excluded, nothing to rank against

        double crr = 0.0;
        for (std::size_t j : test_nbrs[i]) {
            std::size_t closer = 0;
            for (std::size_t k : candidates) {
                if (dis(i, k) <= dis(i, j)) ++closer;
            }
            crr += 1.0 / static_cast<double>(closer);
        }
        double ideal = 0.0;
        std::size_t t = std::min(test_nbrs[i].size(), candidates.size());
        for (std::size_t r = 1; r <= t; ++r) ideal += 1.0 / static_cast<double>(r);
        report.per_item.push_back(crr / ideal);
        report.value += crr / ideal;
        ++counted;
    }
    if (counted == 0) throw InvalidInput("ncrr: no vertex has test edges with candidates");
    report.value /= static_cast<double>(counted);
    return report;
}

std::string report_to_json(const EvalReport& report, const std::string& config_echo_json) {
    nlohmann::json j;
    j["metric"] = report.metric;
    j["value"] = report.value;
    j["per_item"] = report.per_item;
    j["config"] = config_echo_json.empty() ? nlohmann::json::object()
                                           : nlohmann::json::parse(config_echo_json);
    return j.dump(2);
}

}  // namespace cvae

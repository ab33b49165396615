#include "cvae/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvae/errors.hpp"

namespace cvae {

SymMatrix::SymMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
    if (n == 0) throw InvalidInput("SymMatrix: dimension must be >= 1");
}

SymMatrix::SymMatrix(std::size_t n, const std::vector<double>& entries) : n_(n), data_(entries) {
    if (n == 0) throw InvalidInput("SymMatrix: dimension must be >= 1");
    if (entries.size() != n * n) throw InvalidInput("SymMatrix: entry count does not match n*n");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (data_[i * n + j] != data_[j * n + i]) {
                throw InvalidInput("SymMatrix: entries are not symmetric");
            }
        }
    }
}

double SymMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

EigenDecomp sym_eigendecomp(const SymMatrix& a) {
    const std::size_t n = a.size();
    for (double v : a.data()) {
        if (!std::isfinite(v)) throw InvalidInput("sym_eigendecomp: non-finite entry");
    }

    std::vector<double> m(a.data());
    std::vector<double> q(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += m[i * n + j] * m[i * n + j];
        return s;
    };

    const double scale = a.frobenius_norm();
    const double tol = (scale > 0.0 ? scale : 1.0) * 1e-15;
    const int max_sweeps = 100;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (std::sqrt(2.0 * off_norm()) <= tol) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t s = p + 1; s < n; ++s) {
                double apq = m[p * n + s];
                if (std::abs(apq) <= tol * 1e-3) continue;
                double app = m[p * n + p];
                double aqq = m[s * n + s];
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * c;
                double tau = sn / (1.0 + c);

                m[p * n + p] = app - t * apq;
                m[s * n + s] = aqq + t * apq;
                m[p * n + s] = 0.0;
                m[s * n + p] = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != s) {
                        double arp = m[r * n + p];
                        double arq = m[r * n + s];
                        m[r * n + p] = m[p * n + r] = arp - sn * (arq + tau * arp);
                        m[r * n + s] = m[s * n + r] = arq + sn * (arp - tau * arq);
                    }
                    double qrp = q[r * n + p];
                    double qrq = q[r * n + s];
                    q[r * n + p] = qrp - sn * (qrq + tau * qrp);
                    q[r * n + s] = qrq + sn * (qrp - tau * qrq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return m[i * n + i] < m[j * n + j]; });

    EigenDecomp out;
    out.eigenvalues.resize(n);
    out.eigenvectors.assign(n, std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t col = order[k];
        out.eigenvalues[k] = m[col * n + col];
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors[k][r] = q[r * n + col];
    }
    return out;
}

SymMatrix pinv(const SymMatrix& a, double rank_tol) {
    const std::size_t n = a.size();
    EigenDecomp ed = sym_eigendecomp(a);
    double max_abs = 0.0;
    for (double l : ed.eigenvalues) max_abs = std::max(max_abs, std::abs(l));
    const double cut = rank_tol * max_abs;

    SymMatrix out(n);
    std::vector<double> buf(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double l = ed.eigenvalues[k];
        if (std::abs(l) <= cut) continue;
        double inv = 1.0 / l;
        const auto& v = ed.eigenvectors[k];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) buf[i * n + j] += inv * v[i] * v[j];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = 0.5 * (buf[i * n + j] + buf[j * n + i]);
            out.set(i, j, v);
        }
    return out;
}

double determinant(const SymMatrix& a) {
    const std::size_t n = a.size();
    for (double v : a.data()) {
        if (!std::isfinite(v)) throw InvalidInput("determinant: non-finite entry");
    }
    std::vector<double> m(a.data());
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m[r * n + col]) > std::abs(m[piv * n + col])) piv = r;
        }
        if (m[piv * n + col] == 0.0) return 0.0;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(m[piv * n + c], m[col * n + c]);
            det = -det;
        }
        det *= m[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = m[r * n + col] / m[col * n + col];
            for (std::size_t c = col; c < n; ++c) m[r * n + c] -= f * m[col * n + c];
        }
    }
    return det;
}

PrincipalComponent first_principal_component(const std::vector<std::vector<double>>& x) {
    const std::size_t n = x.size();
    if (n < 2) throw InvalidInput("first_principal_component: need at least 2 rows");
    const std::size_t d = x[0].size();
    for (const auto& row : x) {
        if (row.size() != d) throw InvalidInput("first_principal_component: ragged rows");
    }

    std::vector<double> mean(d, 0.0);
    for (const auto& row : x)
        for (std::size_t k = 0; k < d; ++k) mean[k] += row[k];
    for (double& v : mean) v /= static_cast<double>(n);

    std::vector<std::vector<double>> centered(n, std::vector<double>(d));
    double total_var = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            centered[i][k] = x[i][k] - mean[k];
            total_var += centered[i][k] * centered[i][k];
        }
    if (total_var <= 1e-24) throw DegenerateData("first_principal_component: all rows identical");

    SymMatrix cov(d);
    for (std::size_t p = 0; p < d; ++p) {
        for (std::size_t q = p; q < d; ++q) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += centered[i][p] * centered[i][q];
            cov.set(p, q, s / static_cast<double>(n - 1));
        }
    }

    EigenDecomp ed = sym_eigendecomp(cov);
    PrincipalComponent out;
    out.direction = ed.eigenvectors.back();  // largest eigenvalue
    // fix the sign so the first nonzero coordinate is positive (determinism)
    for (double v : out.direction) {
        if (std::abs(v) > 1e-12) {
            if (v < 0)
                for (double& w : out.direction) w = -w;
            break;
        }
    }
    out.scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += centered[i][k] * out.direction[k];
        out.scores[i] = s;
    }
    return out;
}

}  // namespace cvae

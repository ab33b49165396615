#include "cvae/gaussian.hpp"

#include <cmath>

#include "cvae/errors.hpp"

namespace cvae {

void DiagGaussian::validate() const {
    if (mu.size() != sigma.size()) throw InvalidInput("DiagGaussian: mu/sigma size mismatch");
    for (double s : sigma) {
        if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("DiagGaussian: sigma must be positive");
    }
    for (double m : mu) {
        if (!std::isfinite(m)) throw InvalidInput("DiagGaussian: non-finite mean");
    }
}

void PairGaussian::validate() const {
    a.validate();
    b.validate();
    if (a.dim() != b.dim() || rho.size() != a.dim()) throw InvalidInput("PairGaussian: dim mismatch");
    for (double r : rho) {
        if (!(std::abs(r) < 1.0)) throw InvalidInput("PairGaussian: |rho| must be < 1");
    }
}

void PriorConfig::validate() const {
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("PriorConfig: tau must be in (0,1)");
    if (d == 0) throw InvalidInput("PriorConfig: d must be >= 1");
}

double kl_singleton(const DiagGaussian& q) {
    double total = 0.0;
    for (std::size_t k = 0; k < q.dim(); ++k) {
        double s2 = q.sigma[k] * q.sigma[k];
        total += 0.5 * (s2 + q.mu[k] * q.mu[k] - 1.0 - std::log(s2));
    }
    return total;
}

DiagGrad kl_singleton_grad(const DiagGaussian& q) {
    DiagGrad g;
    g.dmu.resize(q.dim());
    g.dsigma.resize(q.dim());
    for (std::size_t k = 0; k < q.dim(); ++k) {
        g.dmu[k] = q.mu[k];
        g.dsigma[k] = q.sigma[k] - 1.0 / q.sigma[k];
    }
    return g;
}

double kl_pair(const PairGaussian& q, const PriorConfig& prior) {
    const double tau = prior.tau;
    const double om = 1.0 - tau * tau;
    double total = 0.0;
    for (std::size_t k = 0; k < q.dim(); ++k) {
        double sa = q.a.sigma[k], sb = q.b.sigma[k];
        double ma = q.a.mu[k], mb = q.b.mu[k];
        double r = q.rho[k];
        double trace = (sa * sa + sb * sb - 2.0 * tau * r * sa * sb) / om;
        double quad = (ma * ma + mb * mb - 2.0 * tau * ma * mb) / om;
        double logdet = std::log(sa * sa * sb * sb * (1.0 - r * r) / om);
        total += 0.5 * (trace + quad - 2.0 - logdet);
    }
    return total;
}

PairGrad kl_pair_grad(const PairGaussian& q, const PriorConfig& prior) {
    const double tau = prior.tau;
    const double om = 1.0 - tau * tau;
    const std::size_t d = q.dim();
    PairGrad g;
    g.a.dmu.resize(d);
    g.a.dsigma.resize(d);
    g.b.dmu.resize(d);
    g.b.dsigma.resize(d);
    g.drho.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        double sa = q.a.sigma[k], sb = q.b.sigma[k];
        double ma = q.a.mu[k], mb = q.b.mu[k];
        double r = q.rho[k];
        g.a.dmu[k] = (ma - tau * mb) / om;
        g.b.dmu[k] = (mb - tau * ma) / om;
        g.a.dsigma[k] = (sa - tau * r * sb) / om - 1.0 / sa;
        g.b.dsigma[k] = (sb - tau * r * sa) / om - 1.0 / sb;
        g.drho[k] = -tau * sa * sb / om + r / (1.0 - r * r);
    }
    return g;
}

double mutual_information(const PairGaussian& q) {
    double total = 0.0;
    for (double r : q.rho) total += -0.5 * std::log(1.0 - r * r);
    return total;
}

std::vector<double> mutual_information_grad_rho(const PairGaussian& q) {
    std::vector<double> g(q.dim());
    for (std::size_t k = 0; k < q.dim(); ++k) {
        double r = q.rho[k];
        g[k] = r / (1.0 - r * r);
    }
    return g;
}

double cross_ratio_expectation(const DiagGaussian& a, const DiagGaussian& b,
                               const PriorConfig& prior) {
    if (a.dim() != b.dim()) throw InvalidInput("cross_ratio_expectation: dim mismatch");
    const double tau = prior.tau;
    const double om = 1.0 - tau * tau;
    double total = 0.0;
    for (std::size_t k = 0; k < a.dim(); ++k) {
        double m2a = a.mu[k] * a.mu[k] + a.sigma[k] * a.sigma[k];
        double m2b = b.mu[k] * b.mu[k] + b.sigma[k] * b.sigma[k];
        total += -0.5 * std::log(om) - (m2a + m2b - 2.0 * tau * a.mu[k] * b.mu[k]) / (2.0 * om) +
                 0.5 * (m2a + m2b);
    }
    return total;
}

PairGrad cross_ratio_expectation_grad(const DiagGaussian& a, const DiagGaussian& b,
                                      const PriorConfig& prior) {
    const double tau = prior.tau;
    const double om = 1.0 - tau * tau;
    const std::size_t d = a.dim();
    PairGrad g;
    g.a.dmu.resize(d);
    g.a.dsigma.resize(d);
    g.b.dmu.resize(d);
    g.b.dsigma.resize(d);
    g.drho.assign(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        g.a.dmu[k] = a.mu[k] - (a.mu[k] - tau * b.mu[k]) / om;
        g.b.dmu[k] = b.mu[k] - (b.mu[k] - tau * a.mu[k]) / om;
        g.a.dsigma[k] = a.sigma[k] - a.sigma[k] / om;
        g.b.dsigma[k] = b.sigma[k] - b.sigma[k] / om;
    }
    return g;
}

double expected_sq_distance(const DiagGaussian& a, const DiagGaussian& b,
                            const std::optional<std::vector<double>>& rho) {
    if (a.dim() != b.dim()) throw InvalidInput("expected_sq_distance: dim mismatch");
    if (rho && rho->size() != a.dim()) throw InvalidInput("expected_sq_distance: rho dim mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < a.dim(); ++k) {
        double dm = a.mu[k] - b.mu[k];
        total += dm * dm + a.sigma[k] * a.sigma[k] + b.sigma[k] * b.sigma[k];
        if (rho) total -= 2.0 * (*rho)[k] * a.sigma[k] * b.sigma[k];
    }
    return total;
}

std::vector<double> sample(const DiagGaussian& q, std::span<const double> eps) {
    if (eps.size() != q.dim()) throw InvalidInput("sample: eps size mismatch");
    std::vector<double> z(q.dim());
    for (std::size_t k = 0; k < q.dim(); ++k) z[k] = q.mu[k] + q.sigma[k] * eps[k];
    return z;
}

std::pair<std::vector<double>, std::vector<double>> sample_pair(const PairGaussian& q,
                                                                std::span<const double> eps) {
    const std::size_t d = q.dim();
    if (eps.size() != 2 * d) throw InvalidInput("sample_pair: eps size mismatch");
    std::vector<double> za(d), zb(d);
    for (std::size_t k = 0; k < d; ++k) {
        double sa = q.a.sigma[k], sb = q.b.sigma[k];
        double r = q.rho[k];
        // Cholesky of [[sa^2, r sa sb], [r sa sb, sb^2]]
        za[k] = q.a.mu[k] + sa * eps[k];
        zb[k] = q.b.mu[k] + sb * (r * eps[k] + std::sqrt(1.0 - r * r) * eps[d + k]);
    }
    return {za, zb};
}

}  // namespace cvae

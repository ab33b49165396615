#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cvae {

// Diagonal Gaussian with standard deviations (not variances).
struct DiagGaussian {
    std::vector<double> mu;
    std::vector<double> sigma;

    std::size_t dim() const { return mu.size(); }
    void validate() const;
};

// Per-dimension bivariate Gaussian: dimension k of (z_a, z_b) has covariance
// [[sa^2, rho*sa*sb], [rho*sa*sb, sb^2]]. Marginals are exactly a and b.
struct PairGaussian {
    DiagGaussian a;
    DiagGaussian b;
    std::vector<double> rho;  // each strictly inside (-1, 1)

    std::size_t dim() const { return a.dim(); }
    void validate() const;
};

struct PriorConfig {
    double tau;     // in (0, 1)
    std::size_t d;  // latent dimension

    void validate() const;
};

// KL(q || N(0, I))
double kl_singleton(const DiagGaussian& q);

// KL(q || prior pair density with covariance [[I, tau I], [tau I, I]])
double kl_pair(const PairGaussian& q, const PriorConfig& prior);

// E_q log [q(za,zb) / (q(za) q(zb))] = -1/2 sum_k ln(1 - rho_k^2)
double mutual_information(const PairGaussian& q);

// E_{a(za) b(zb)} log [p0(za,zb) / (p0(za) p0(zb))]
double cross_ratio_expectation(const DiagGaussian& a, const DiagGaussian& b,
                               const PriorConfig& prior);

// E ||za - zb||^2 under independent marginals (rho absent) or the pair density.
double expected_sq_distance(const DiagGaussian& a, const DiagGaussian& b,
                            const std::optional<std::vector<double>>& rho = std::nullopt);

// z = mu + sigma .* eps
std::vector<double> sample(const DiagGaussian& q, std::span<const double> eps);

// Per-dimension Cholesky of the 2x2 covariance applied to (eps[k], eps[d+k]).
std::pair<std::vector<double>, std::vector<double>> sample_pair(const PairGaussian& q,
                                                                std::span<const double> eps);

// --- closed-form derivatives, used to assemble objective gradients ---

struct DiagGrad {
    std::vector<double> dmu;
    std::vector<double> dsigma;
};

struct PairGrad {
    DiagGrad a;
    DiagGrad b;
    std::vector<double> drho;
};

DiagGrad kl_singleton_grad(const DiagGaussian& q);
PairGrad kl_pair_grad(const PairGaussian& q, const PriorConfig& prior);
std::vector<double> mutual_information_grad_rho(const PairGaussian& q);
PairGrad cross_ratio_expectation_grad(const DiagGaussian& a, const DiagGaussian& b,
                                      const PriorConfig& prior);

}  // namespace cvae

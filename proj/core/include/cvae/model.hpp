#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvae/gaussian.hpp"
#include "cvae/graph.hpp"
#include "cvae/nn.hpp"
#include "cvae/rng.hpp"

namespace cvae {

enum class Variant { Vae, CvaeInd, CvaeCorr };
enum class Likelihood { Bernoulli, Multinomial };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);
std::string likelihood_name(Likelihood l);
Likelihood likelihood_from_name(const std::string& name);

using DataMatrix = std::vector<std::vector<double>>;   // n rows of D features
using NoiseMatrix = std::vector<std::vector<double>>;  // n rows of d draws

struct CvaeModel {
    Mlp encoder;   // D -> 2d (mu, log sigma)
    Mlp pair_net;  // 2D -> d raw per-dimension correlations (CvaeCorr only)
    Mlp decoder;   // d -> D logits
    PriorConfig prior;
    Likelihood likelihood = Likelihood::Bernoulli;
    Variant variant = Variant::Vae;

    std::size_t latent_dim() const { return prior.d; }
    std::size_t data_dim() const { return encoder.in_dim; }
};

CvaeModel make_model(Variant variant, Likelihood likelihood, std::size_t data_dim,
                     std::size_t latent_dim, std::size_t hidden_dim, double tau, Rng& init_rng);

// Singleton variational density for row x (encoder output split into mu and
// exponentiated log sigma).
DiagGaussian encode(const CvaeModel& model, std::span<const double> x);

// Symmetrized per-dimension correlation for the pair (x_i, x_j):
// rho = (tanh(net(x_i||x_j)) + tanh(net(x_j||x_i))) / 2.
std::vector<double> pair_correlation(const CvaeModel& model, std::span<const double> xi,
                                     std::span<const double> xj);

double log_likelihood(const CvaeModel& model, std::span<const double> x,
                      std::span<const double> z);

struct ObjectiveTerms {
    double total = 0.0;
    double recon = 0.0;
    double kl_singleton = 0.0;  // sum of singleton KLs (positive quantity)
    double kl_pair = 0.0;       // weighted sum of pairwise KL brackets
    double neg_reg = 0.0;       // negative-sampling regularizer value
};

struct ModelGrads {
    MlpGrads encoder;
    MlpGrads pair_net;
    MlpGrads decoder;

    explicit ModelGrads(const CvaeModel& m)
        : encoder(m.encoder), pair_net(m.pair_net), decoder(m.decoder) {}

    std::vector<double> flatten() const;
    void scale(double f);
};

std::vector<double> flatten_params(const CvaeModel& m);
void unflatten_params(CvaeModel& m, std::span<const double> flat);

// Full-batch objectives. `noise` supplies one frozen standard-normal draw per
// vertex for the reconstruction expectation.
ObjectiveTerms elbo_vae(const CvaeModel& model, const DataMatrix& data, const NoiseMatrix& noise,
                        ModelGrads* grads = nullptr);

ObjectiveTerms elbo_cvae_ind_acyclic(const CvaeModel& model, const DataMatrix& data,
                                     const Graph& graph, const NoiseMatrix& noise);

ObjectiveTerms elbo_cvae_corr_acyclic(const CvaeModel& model, const DataMatrix& data,
                                      const Graph& graph, const NoiseMatrix& noise);

// Weighted objective for general graphs. Uses rho = 0 in every pairwise term
// when model.variant == CvaeInd.
ObjectiveTerms elbo_cvae_corr_general(const CvaeModel& model, const DataMatrix& data,
                                      const Graph& graph, const EdgeWeightMap& weights,
                                      const NoiseMatrix& noise, ModelGrads* grads = nullptr);

// Weighted objective minus the gamma-scaled negative-sampling regularizer.
ObjectiveTerms loss_cvae_corr_ns(const CvaeModel& model, const DataMatrix& data,
                                 const Graph& graph, const EdgeWeightMap& weights, double gamma,
                                 const NoiseMatrix& noise, ModelGrads* grads = nullptr);

// The variant-selected full-batch objective (Vae / weighted / weighted-NS).
ObjectiveTerms full_objective(const CvaeModel& model, const DataMatrix& data, const Graph& graph,
                              const EdgeWeightMap& weights, double gamma, const NoiseMatrix& noise,
                              ModelGrads* grads = nullptr);

struct Batch {
    std::vector<std::size_t> vertices;  // singleton group
    std::vector<Edge> pos_edges;        // sampled from E, carry w^MAS
    std::vector<Edge> neg_pairs;        // sampled uniformly from all unordered pairs
    NoiseMatrix noise;                  // one draw per entry of `vertices`
};

Batch sample_batch(const CvaeModel& model, const Graph& graph, std::size_t b1, std::size_t b2,
                   Rng& batch_rng, Rng& noise_rng);

// Unbiased minibatch estimate of the variant's objective (and its gradient).
ObjectiveTerms batch_objective(const CvaeModel& model, const DataMatrix& data, const Graph& graph,
                               const EdgeWeightMap& weights, double gamma, const Batch& batch,
                               ModelGrads* grads = nullptr);

// Closed-form loss on K4 with all singleton means mu, decoder decoupled from z.
double naive_loss_k4(double mu, double tau, const std::vector<double>& sigma);

struct TrainConfig {
    double gamma = 1.0;
    double lr = 1e-3;
    std::size_t epochs = 0;
    std::size_t b1_singleton = 64;
    std::size_t b2_pairwise = 256;
    std::uint64_t seed = 0;
    std::size_t hidden_dim = 128;
    double guard_c = 4.0;  // warn when gamma > guard_c * |V| (|V|-|CC|) / |E|
};

struct EpochTrace {
    std::size_t epoch;
    double objective, recon, kl_singleton, kl_pair, neg_reg;
};

struct TrainResult {
    std::vector<EpochTrace> trace;
    bool gamma_guard_exceeded = false;
    double gamma_guard_bound = 0.0;
};

// Stochastic gradient ascent on the variant-selected objective; deterministic
// given config.seed. Throws NonFiniteGradient with the offending step index.
TrainResult train(CvaeModel& model, const DataMatrix& data, const Graph& graph,
                  const TrainConfig& config);

std::string trace_to_csv(const std::vector<EpochTrace>& trace);

nlohmann::json model_to_json(const CvaeModel& model, std::uint64_t seed);
CvaeModel model_from_json(const nlohmann::json& j);

}  // namespace cvae

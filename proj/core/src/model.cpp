#include "cvae/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "cvae/errors.hpp"

namespace cvae {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Vae: return "vae";
        case Variant::CvaeInd: return "cvae_ind";
        case Variant::CvaeCorr: return "cvae_corr";
    }
    return "vae";
}

Variant variant_from_name(const std::string& name) {
    if (name == "vae") return Variant::Vae;
    if (name == "cvae_ind") return Variant::CvaeInd;
    if (name == "cvae_corr") return Variant::CvaeCorr;
    throw InvalidInput("unknown variant: " + name);
}

std::string likelihood_name(Likelihood l) {
    return l == Likelihood::Bernoulli ? "bernoulli" : "multinomial";
}

Likelihood likelihood_from_name(const std::string& name) {
    if (name == "bernoulli") return Likelihood::Bernoulli;
    if (name == "multinomial") return Likelihood::Multinomial;
    throw InvalidInput("unknown likelihood: " + name);
}

CvaeModel make_model(Variant variant, Likelihood likelihood, std::size_t data_dim,
                     std::size_t latent_dim, std::size_t hidden_dim, double tau, Rng& init_rng) {
    CvaeModel m;
    m.variant = variant;
    m.likelihood = likelihood;
    m.prior = PriorConfig{tau, latent_dim};
    m.prior.validate();
    m.encoder = make_mlp(data_dim, hidden_dim, 2 * latent_dim, Activation::Tanh, init_rng);
    if (variant == Variant::CvaeCorr) {
        m.pair_net = make_mlp(2 * data_dim, hidden_dim, latent_dim, Activation::Tanh, init_rng);
    }
    m.decoder = make_mlp(latent_dim, hidden_dim, data_dim, Activation::Tanh, init_rng);
    return m;
}

DiagGaussian encode(const CvaeModel& model, std::span<const double> x) {
    std::vector<double> out = forward(model.encoder, x);
    const std::size_t d = model.latent_dim();
    DiagGaussian q;
    q.mu.assign(out.begin(), out.begin() + d);
    q.sigma.resize(d);
    for (std::size_t k = 0; k < d; ++k) q.sigma[k] = std::exp(out[d + k]);
    return q;
}

namespace {

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

double loglik_from_logits(Likelihood lik, std::span<const double> x,
                          std::span<const double> logits, std::vector<double>* dlogits) {
    const std::size_t D = x.size();
    if (logits.size() != D) throw InvalidInput("log_likelihood: logits size mismatch");
    if (dlogits) dlogits->assign(D, 0.0);
    double ll = 0.0;
    if (lik == Likelihood::Bernoulli) {
        for (std::size_t k = 0; k < D; ++k) {
            double l = logits[k];
            // log sigma(l) = -softplus(-l), log(1 - sigma(l)) = -softplus(l)
            double sp_pos = l > 30 ? l : std::log1p(std::exp(l));
            double sp_neg = -l > 30 ? -l : std::log1p(std::exp(-l));
            ll += x[k] * (-sp_neg) + (1.0 - x[k]) * (-sp_pos);
            if (dlogits) (*dlogits)[k] = x[k] - 1.0 / (1.0 + std::exp(-l));
        }
    } else {
        double total = 0.0;
        for (double v : x) {
            if (v < 0.0) throw InvalidInput("log_likelihood: negative count in multinomial data");
            total += v;
        }
        double mx = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (double l : logits) z += std::exp(l - mx);
        double logz = mx + std::log(z);
        for (std::size_t k = 0; k < D; ++k) {
            ll += x[k] * (logits[k] - logz);
            if (dlogits) (*dlogits)[k] = x[k] - total * std::exp(logits[k] - logz);
        }
    }
    return ll;
}

struct EncodedVertex {
    DiagGaussian q;
    MlpCache cache;
    std::vector<double> dmu;
    std::vector<double> dlogsig;
};

}  // namespace

std::vector<double> pair_correlation(const CvaeModel& model, std::span<const double> xi,
                                     std::span<const double> xj) {
    if (model.pair_net.in_dim == 0) throw InvalidInput("pair_correlation: model has no pair net");
    std::vector<double> rij = forward(model.pair_net, concat(xi, xj));
    std::vector<double> rji = forward(model.pair_net, concat(xj, xi));
    std::vector<double> rho(rij.size());
    for (std::size_t k = 0; k < rho.size(); ++k) {
        rho[k] = 0.5 * (std::tanh(rij[k]) + std::tanh(rji[k]));
    }
    return rho;
}

double log_likelihood(const CvaeModel& model, std::span<const double> x,
                      std::span<const double> z) {
    std::vector<double> logits = forward(model.decoder, z);
    return loglik_from_logits(model.likelihood, x, logits, nullptr);
}

std::vector<double> ModelGrads::flatten() const {
    std::vector<double> out = encoder.flatten();
    std::vector<double> p = pair_net.flatten();
    std::vector<double> d = decoder.flatten();
    out.insert(out.end(), p.begin(), p.end());
    out.insert(out.end(), d.begin(), d.end());
    return out;
}

void ModelGrads::scale(double f) {
    encoder.scale(f);
    pair_net.scale(f);
    decoder.scale(f);
}

std::vector<double> flatten_params(const CvaeModel& m) {
    std::vector<double> out = m.encoder.flatten();
    std::vector<double> p = m.pair_net.flatten();
    std::vector<double> d = m.decoder.flatten();
    out.insert(out.end(), p.begin(), p.end());
    out.insert(out.end(), d.begin(), d.end());
    return out;
}

void unflatten_params(CvaeModel& m, std::span<const double> flat) {
    std::size_t ne = m.encoder.param_count();
    std::size_t np = m.pair_net.param_count();
    std::size_t nd = m.decoder.param_count();
    if (flat.size() != ne + np + nd) throw InvalidInput("unflatten_params: size mismatch");
    m.encoder.unflatten(flat.subspan(0, ne));
    if (np > 0) m.pair_net.unflatten(flat.subspan(ne, np));
    m.decoder.unflatten(flat.subspan(ne + np, nd));
}

namespace {

// One evaluation path for all variants: singleton group with scale s1,
// positive edge group with scale s2, negative pair group with scale s3
// (s3 already folds in gamma * 2/n and the subsampling rescale). `gamma`
// controls the singleton part of the regularizer; it rides along with the
// singleton group so the minibatch estimator stays unbiased.
ObjectiveTerms eval_terms(const CvaeModel& model, const DataMatrix& data,
                          const std::vector<std::size_t>& vertices, double s1,
                          const std::vector<Edge>& pos_edges, double s2,
                          const EdgeWeightMap* weights, const std::vector<Edge>& neg_pairs,
                          double s3, double gamma, bool use_rho, bool neg_terms,
                          const NoiseMatrix& noise, bool noise_by_position, ModelGrads* grads) {
    const std::size_t d = model.latent_dim();
    ObjectiveTerms out;

    // encode every vertex that appears in a singleton or positive-edge term
    std::unordered_map<std::size_t, EncodedVertex> enc;
    auto get_enc = [&](std::size_t v) -> EncodedVertex& {
        auto it = enc.find(v);
        if (it != enc.end()) return it->second;
        EncodedVertex ev;
        std::vector<double> y = forward(model.encoder, data[v], grads ? &ev.cache : nullptr);
        ev.q.mu.assign(y.begin(), y.begin() + d);
        ev.q.sigma.resize(d);
        for (std::size_t k = 0; k < d; ++k) ev.q.sigma[k] = std::exp(y[d + k]);
        ev.dmu.assign(d, 0.0);
        ev.dlogsig.assign(d, 0.0);
        return enc.emplace(v, std::move(ev)).first->second;
    };

    const double gamma_s = neg_terms ? gamma : 0.0;

    // singleton group: reconstruction, singleton KL, singleton part of the
    // regularizer
    for (std::size_t p = 0; p < vertices.size(); ++p) {
        std::size_t i = vertices[p];
        EncodedVertex& ev = get_enc(i);
        const std::vector<double>& eps = noise_by_position ? noise[p] : noise[i];
        std::vector<double> z(d);
        for (std::size_t k = 0; k < d; ++k) z[k] = ev.q.mu[k] + ev.q.sigma[k] * eps[k];

        MlpCache dec_cache;
        std::vector<double> logits = forward(model.decoder, z, grads ? &dec_cache : nullptr);
        std::vector<double> dlogits;
        double ll =
            loglik_from_logits(model.likelihood, data[i], logits, grads ? &dlogits : nullptr);
        double kli = kl_singleton(ev.q);

        out.recon += s1 * ll;
        out.kl_singleton += s1 * kli;
        out.neg_reg += s1 * gamma_s * kli;
        out.total += s1 * (ll - (1.0 + gamma_s) * kli);

        if (grads) {
            for (double& g : dlogits) g *= s1;
            std::vector<double> dz = backward(model.decoder, dec_cache, dlogits, grads->decoder);
            DiagGrad gkl = kl_singleton_grad(ev.q);
            double coeff = -s1 * (1.0 + gamma_s);
            for (std::size_t k = 0; k < d; ++k) {
                ev.dmu[k] += dz[k] + coeff * gkl.dmu[k];
                ev.dlogsig[k] += dz[k] * ev.q.sigma[k] * eps[k] +
                                 coeff * gkl.dsigma[k] * ev.q.sigma[k];
            }
        }
    }

    // positive edges: -w_e (KL_pair - KL_i - KL_j)
    for (const auto& e : pos_edges) {
        std::size_t i = e.first, j = e.second;
        double w = weights->at(e);
        EncodedVertex& evi = get_enc(i);
        EncodedVertex& evj = get_enc(j);

        PairGaussian q;
        q.a = evi.q;
        q.b = evj.q;
        MlpCache cij, cji;
        std::vector<double> tij, tji;
        if (use_rho) {
            std::vector<double> rij =
                forward(model.pair_net, concat(data[i], data[j]), grads ? &cij : nullptr);
            std::vector<double> rji =
                forward(model.pair_net, concat(data[j], data[i]), grads ? &cji : nullptr);
            tij.resize(d);
            tji.resize(d);
            q.rho.resize(d);
            for (std::size_t k = 0; k < d; ++k) {
                tij[k] = std::tanh(rij[k]);
                tji[k] = std::tanh(rji[k]);
                q.rho[k] = 0.5 * (tij[k] + tji[k]);
            }
        } else {
            q.rho.assign(d, 0.0);
        }

        double klp = kl_pair(q, model.prior);
        double kli = kl_singleton(evi.q);
        double klj = kl_singleton(evj.q);
        double bracket = klp - kli - klj;
        out.kl_pair += s2 * w * bracket;
        out.total += -s2 * w * bracket;

        if (grads) {
            PairGrad gp = kl_pair_grad(q, model.prior);
            DiagGrad gi = kl_singleton_grad(evi.q);
            DiagGrad gj = kl_singleton_grad(evj.q);
            double c = -s2 * w;
            for (std::size_t k = 0; k < d; ++k) {
                evi.dmu[k] += c * (gp.a.dmu[k] - gi.dmu[k]);
                evi.dlogsig[k] += c * (gp.a.dsigma[k] - gi.dsigma[k]) * evi.q.sigma[k];
                evj.dmu[k] += c * (gp.b.dmu[k] - gj.dmu[k]);
                evj.dlogsig[k] += c * (gp.b.dsigma[k] - gj.dsigma[k]) * evj.q.sigma[k];
            }
            if (use_rho) {
                std::vector<double> draw_ij(d), draw_ji(d);
                for (std::size_t k = 0; k < d; ++k) {
                    double drho = c * gp.drho[k];
                    draw_ij[k] = drho * 0.5 * (1.0 - tij[k] * tij[k]);
                    draw_ji[k] = drho * 0.5 * (1.0 - tji[k] * tji[k]);
                }
                backward(model.pair_net, cij, draw_ij, grads->pair_net);
                backward(model.pair_net, cji, draw_ji, grads->pair_net);
            }
        }
    }

    // negative pairs: mutual-information part of the regularizer
    if (neg_terms) {
        for (const auto& e : neg_pairs) {
            std::size_t i = e.first, j = e.second;
            MlpCache cij, cji;
            std::vector<double> rij =
                forward(model.pair_net, concat(data[i], data[j]), grads ? &cij : nullptr);
            std::vector<double> rji =
                forward(model.pair_net, concat(data[j], data[i]), grads ? &cji : nullptr);
            double mi = 0.0;
            std::vector<double> tij(d), tji(d), rho(d);
            for (std::size_t k = 0; k < d; ++k) {
                tij[k] = std::tanh(rij[k]);
                tji[k] = std::tanh(rji[k]);
                rho[k] = 0.5 * (tij[k] + tji[k]);
                mi += -0.5 * std::log(1.0 - rho[k] * rho[k]);
            }
            out.neg_reg += s3 * mi;
            out.total += -s3 * mi;
            if (grads) {
                std::vector<double> draw_ij(d), draw_ji(d);
                for (std::size_t k = 0; k < d; ++k) {
                    double dmi = rho[k] / (1.0 - rho[k] * rho[k]);
                    double drho = -s3 * dmi;
                    draw_ij[k] = drho * 0.5 * (1.0 - tij[k] * tij[k]);
                    draw_ji[k] = drho * 0.5 * (1.0 - tji[k] * tji[k]);
                }
                backward(model.pair_net, cij, draw_ij, grads->pair_net);
                backward(model.pair_net, cji, draw_ji, grads->pair_net);
            }
        }
    }

    // push accumulated (dmu, dlogsig) through the encoder, fixed vertex order
    if (grads) {
        std::vector<std::size_t> order;
        order.reserve(enc.size());
        for (const auto& [v, ev] : enc) order.push_back(v);
        std::sort(order.begin(), order.end());
        for (std::size_t v : order) {
            EncodedVertex& ev = enc.at(v);
            std::vector<double> dy = concat(ev.dmu, ev.dlogsig);
            backward(model.encoder, ev.cache, dy, grads->encoder);
        }
    }
    return out;
}

std::vector<std::size_t> all_vertices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

std::vector<Edge> all_pairs(std::size_t n) {
    std::vector<Edge> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    return pairs;
}

void require_acyclic(const Graph& g) {
    std::size_t cc = connected_components(g).size();
    if (g.edge_count() != g.vertex_count() - cc) {
        throw NotAcyclic("graph contains a cycle");
    }
}

void check_shapes(const CvaeModel& model, const DataMatrix& data, const NoiseMatrix& noise) {
    for (const auto& row : data) {
        if (row.size() != model.data_dim()) throw InvalidInput("data row dimension mismatch");
    }
    if (noise.size() < data.size()) throw InvalidInput("noise matrix too small");
    for (const auto& row : noise) {
        if (row.size() != model.latent_dim()) throw InvalidInput("noise row dimension mismatch");
    }
}

}  // namespace

ObjectiveTerms elbo_vae(const CvaeModel& model, const DataMatrix& data, const NoiseMatrix& noise,
                        ModelGrads* grads) {
    check_shapes(model, data, noise);
    return eval_terms(model, data, all_vertices(data.size()), 1.0, {}, 1.0, nullptr, {}, 0.0, 0.0,
                      false, false, noise, false, grads);
}

ObjectiveTerms elbo_cvae_ind_acyclic(const CvaeModel& model, const DataMatrix& data,
                                     const Graph& graph, const NoiseMatrix& noise) {
    check_shapes(model, data, noise);
    require_acyclic(graph);
    ObjectiveTerms out = elbo_vae(model, data, noise);
    for (const auto& [i, j] : graph.edges()) {
        DiagGaussian qi = encode(model, data[i]);
        DiagGaussian qj = encode(model, data[j]);
        double cross = cross_ratio_expectation(qi, qj, model.prior);
        out.kl_pair += -cross;
        out.total += cross;
    }
    return out;
}

ObjectiveTerms elbo_cvae_corr_acyclic(const CvaeModel& model, const DataMatrix& data,
                                      const Graph& graph, const NoiseMatrix& noise) {
    check_shapes(model, data, noise);
    require_acyclic(graph);
    bool use_rho = model.variant == Variant::CvaeCorr && model.pair_net.in_dim > 0;
    EdgeWeightMap ones;
    for (const auto& e : graph.edges()) ones.weights[e] = 1.0;
    return eval_terms(model, data, all_vertices(data.size()), 1.0, graph.edges(), 1.0, &ones, {},
                      0.0, 0.0, use_rho, false, noise, false, nullptr);
}

ObjectiveTerms elbo_cvae_corr_general(const CvaeModel& model, const DataMatrix& data,
                                      const Graph& graph, const EdgeWeightMap& weights,
                                      const NoiseMatrix& noise, ModelGrads* grads) {
    check_shapes(model, data, noise);
    bool use_rho = model.variant == Variant::CvaeCorr && model.pair_net.in_dim > 0;
    return eval_terms(model, data, all_vertices(data.size()), 1.0, graph.edges(), 1.0, &weights,
                      {}, 0.0, 0.0, use_rho, false, noise, false, grads);
}

ObjectiveTerms loss_cvae_corr_ns(const CvaeModel& model, const DataMatrix& data,
                                 const Graph& graph, const EdgeWeightMap& weights, double gamma,
                                 const NoiseMatrix& noise, ModelGrads* grads) {
    check_shapes(model, data, noise);
    if (gamma < 0.0) throw InvalidInput("loss_cvae_corr_ns: gamma must be >= 0");
    if (gamma == 0.0) return elbo_cvae_corr_general(model, data, graph, weights, noise, grads);
    const std::size_t n = data.size();
    bool use_rho = model.variant == Variant::CvaeCorr && model.pair_net.in_dim > 0;
    double s3 = gamma * 2.0 / static_cast<double>(n);
    // without a pair net the MI terms are identically zero
    std::vector<Edge> negs = use_rho ? all_pairs(n) : std::vector<Edge>{};
    return eval_terms(model, data, all_vertices(n), 1.0, graph.edges(), 1.0, &weights, negs, s3,
                      gamma, use_rho, true, noise, false, grads);
}

ObjectiveTerms full_objective(const CvaeModel& model, const DataMatrix& data, const Graph& graph,
                              const EdgeWeightMap& weights, double gamma, const NoiseMatrix& noise,
                              ModelGrads* grads) {
    switch (model.variant) {
        case Variant::Vae: return elbo_vae(model, data, noise, grads);
        case Variant::CvaeInd:
            return elbo_cvae_corr_general(model, data, graph, weights, noise, grads);
        case Variant::CvaeCorr:
            return loss_cvae_corr_ns(model, data, graph, weights, gamma, noise, grads);
    }
    throw InvalidState("unreachable");
}

Batch sample_batch(const CvaeModel& model, const Graph& graph, std::size_t b1, std::size_t b2,
                   Rng& batch_rng, Rng& noise_rng) {
    const std::size_t n = graph.vertex_count();
    Batch batch;
    std::size_t take = std::min(b1, n);
    batch.vertices = batch_rng.sample_without_replacement(n, take);
    std::sort(batch.vertices.begin(), batch.vertices.end());

    if (model.variant != Variant::Vae && graph.edge_count() > 0) {
        batch.pos_edges.reserve(b2);
        for (std::size_t k = 0; k < b2; ++k) {
            batch.pos_edges.push_back(graph.edges()[batch_rng.below(graph.edge_count())]);
        }
    }
    if (model.variant == Variant::CvaeCorr && n >= 2) {
        batch.neg_pairs.reserve(b2);
        for (std::size_t k = 0; k < b2; ++k) {
            std::size_t i = batch_rng.below(n);
            std::size_t j = batch_rng.below(n - 1);
            if (j >= i) ++j;
            batch.neg_pairs.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    batch.noise.resize(batch.vertices.size());
    for (auto& row : batch.noise) row = noise_rng.normals(model.latent_dim());
    return batch;
}

ObjectiveTerms batch_objective(const CvaeModel& model, const DataMatrix& data, const Graph& graph,
                               const EdgeWeightMap& weights, double gamma, const Batch& batch,
                               ModelGrads* grads) {
    const std::size_t n = data.size();
    if (batch.vertices.empty()) throw InvalidInput("batch_objective: empty vertex batch");
    double s1 = static_cast<double>(n) / static_cast<double>(batch.vertices.size());
    double s2 = batch.pos_edges.empty() ? 0.0
                                        : static_cast<double>(graph.edge_count()) /
                                              static_cast<double>(batch.pos_edges.size());
    bool use_rho = model.variant == Variant::CvaeCorr && model.pair_net.in_dim > 0;
    bool neg_terms = model.variant == Variant::CvaeCorr && gamma > 0.0 && !batch.neg_pairs.empty();
    double s3 = 0.0;
    if (neg_terms) {
        double npairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
        s3 = gamma * (2.0 / static_cast<double>(n)) * npairs /
             static_cast<double>(batch.neg_pairs.size());
    }
    return eval_terms(model, data, batch.vertices, s1, batch.pos_edges, s2, &weights,
                      batch.neg_pairs, s3, gamma, use_rho, neg_terms, batch.noise, true, grads);
}

double naive_loss_k4(double mu, double tau, const std::vector<double>& sigma) {
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("naive_loss_k4: tau must be in (0,1)");
    if (sigma.size() != 4) throw InvalidInput("naive_loss_k4: need 4 sigmas");
    const double om = 1.0 - tau * tau;
    double loss = 0.0;
    for (double s : sigma) {
        loss += mu * mu - (1.0 + 2.0 * tau * tau) * s * s / (2.0 * om) + std::log(s);
    }
    // 6 unordered pairs on K4, all means equal
    loss -= 6.0 * (2.0 * mu * mu - 2.0 * tau * mu * mu) / (2.0 * om);
    return loss;
}

TrainResult train(CvaeModel& model, const DataMatrix& data, const Graph& graph,
                  const TrainConfig& config) {
    const std::size_t n = data.size();
    if (graph.vertex_count() != n) throw InvalidInput("train: data rows must match graph vertices");

    TrainResult result;
    EdgeWeightMap weights;
    if (model.variant != Variant::Vae) weights = mas_edge_weights(graph);

    if (model.variant == Variant::CvaeCorr && graph.edge_count() > 0) {
        std::size_t cc = connected_components(graph).size();
        result.gamma_guard_bound = config.guard_c * static_cast<double>(n) *
                                   static_cast<double>(n - cc) /
                                   static_cast<double>(graph.edge_count());
        result.gamma_guard_exceeded = config.gamma > result.gamma_guard_bound;
    }

    Rng batch_rng = Rng::substream(config.seed, "batch");
    Rng noise_rng = Rng::substream(config.seed, "noise");

    std::vector<double> params = flatten_params(model);
    AdamState adam(params.size(), config.lr);

    std::size_t steps_per_epoch =
        std::max<std::size_t>(1, (n + config.b1_singleton - 1) / config.b1_singleton);

    std::size_t global_step = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        ObjectiveTerms avg;
        for (std::size_t s = 0; s < steps_per_epoch; ++s) {
            ++global_step;
            Batch batch = sample_batch(model, graph, config.b1_singleton, config.b2_pairwise,
                                       batch_rng, noise_rng);
            ModelGrads grads(model);
            ObjectiveTerms terms =
                batch_objective(model, data, graph, weights, config.gamma, batch, &grads);
            std::vector<double> flat = grads.flatten();
            for (double& g : flat) g = -g;  // ascent on the objective
            try {
                adam_step(params, flat, adam);
            } catch (const NonFiniteGradient&) {
                throw NonFiniteGradient("non-finite gradient at step " +
                                        std::to_string(global_step));
            }
            unflatten_params(model, params);
            avg.total += terms.total;
            avg.recon += terms.recon;
            avg.kl_singleton += terms.kl_singleton;
            avg.kl_pair += terms.kl_pair;
            avg.neg_reg += terms.neg_reg;
        }
        double inv = 1.0 / static_cast<double>(steps_per_epoch);
        result.trace.push_back({epoch, avg.total * inv, avg.recon * inv, avg.kl_singleton * inv,
                                avg.kl_pair * inv, avg.neg_reg * inv});
    }
    return result;
}

std::string trace_to_csv(const std::vector<EpochTrace>& trace) {
    std::ostringstream out;
    out.precision(12);
    out << "epoch,objective,recon,kl_singleton,kl_pair,neg_reg\n";
    for (const auto& t : trace) {
        out << t.epoch << "," << t.objective << "," << t.recon << "," << t.kl_singleton << ","
            << t.kl_pair << "," << t.neg_reg << "\n";
    }
    return out.str();
}

nlohmann::json model_to_json(const CvaeModel& model, std::uint64_t seed) {
    nlohmann::json j;
    j["format"] = "cvae-checkpoint-1";
    j["variant"] = variant_name(model.variant);
    j["likelihood"] = likelihood_name(model.likelihood);
    j["tau"] = model.prior.tau;
    j["d"] = model.prior.d;
    j["seed"] = seed;
    j["networks"]["encoder"] = mlp_to_json(model.encoder);
    j["networks"]["decoder"] = mlp_to_json(model.decoder);
    if (model.pair_net.in_dim > 0) j["networks"]["pair_net"] = mlp_to_json(model.pair_net);
    return j;
}

CvaeModel model_from_json(const nlohmann::json& j) {
    CvaeModel m;
    m.variant = variant_from_name(j.at("variant").get<std::string>());
    m.likelihood = likelihood_from_name(j.at("likelihood").get<std::string>());
    m.prior.tau = j.at("tau").get<double>();
    m.prior.d = j.at("d").get<std::size_t>();
    m.prior.validate();
    m.encoder = mlp_from_json(j.at("networks").at("encoder"));
    m.decoder = mlp_from_json(j.at("networks").at("decoder"));
    if (j.at("networks").contains("pair_net")) {
        m.pair_net = mlp_from_json(j.at("networks").at("pair_net"));
    }
    if (m.encoder.out_dim != 2 * m.prior.d || m.decoder.in_dim != m.prior.d) {
        throw InvalidInput("model_from_json: network shapes inconsistent with latent dim");
    }
    return m;
}

}  // namespace cvae

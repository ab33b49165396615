// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Tolerances are pinned in code next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cvae/datagen.hpp"
#include "cvae/evalmetrics.hpp"
#include "cvae/gaussian.hpp"
#include "cvae/graph.hpp"
#include "cvae/model.hpp"
#include "cvae/nn.hpp"
#include "cvae/rng.hpp"

using namespace cvae;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, double seconds) {
    std::printf("criterion %2d %-34s %s (%.1fs)\n", index, name.c_str(), pass ? "PASS" : "FAIL",
                seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void run_criterion(int index, const std::string& name, const std::function<bool()>& body) {
    auto start = std::chrono::steady_clock::now();
    bool pass = false;
    try {
        pass = body();
    } catch (const std::exception& e) {
        std::printf("criterion %2d exception: %s\n", index, e.what());
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(index, name, pass, seconds);
}

Graph complete_graph(std::size_t n) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return Graph(n, edges);
}

Graph random_graph(std::size_t n, double p, Rng& rng) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform() < p) edges.emplace_back(i, j);
    return Graph(n, edges);
}

struct McEstimate {
    double mean = 0.0, m2 = 0.0;
    std::size_t count = 0;
    void add(double v) {
        ++count;
        double delta = v - mean;
        mean += delta / double(count);
        m2 += delta * (v - mean);
    }
    double stderr_() const { return std::sqrt(m2 / double(count - 1) / double(count)); }
};

double log_density_1d(double z, double mu, double sigma) {
    double u = (z - mu) / sigma;
    return -0.5 * u * u - std::log(sigma) - 0.5 * std::log(2.0 * M_PI);
}

double log_density_2d(double za, double zb, double mua, double mub, double sa, double sb,
                      double r) {
    double ua = (za - mua) / sa, ub = (zb - mub) / sb;
    double om = 1.0 - r * r;
    return -0.5 * (ua * ua - 2.0 * r * ua * ub + ub * ub) / om -
           std::log(2.0 * M_PI * sa * sb * std::sqrt(om));
}

DiagGaussian random_diag(std::size_t d, Rng& rng) {
    DiagGaussian q;
    for (std::size_t k = 0; k < d; ++k) {
        q.mu.push_back(rng.normal());
        q.sigma.push_back(std::exp(0.5 * rng.normal()));
    }
    return q;
}

struct TinyInstance {
    DataMatrix data;
    Graph graph = Graph(1);
    NoiseMatrix noise;
};

TinyInstance tiny_instance(std::size_t n, std::size_t D, std::size_t d,
                           const std::vector<Edge>& edges, std::uint64_t seed) {
    TinyInstance t;
    Rng rng(seed);
    t.data.assign(n, std::vector<double>(D));
    for (auto& row : t.data)
        for (double& v : row) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    t.graph = Graph(n, edges);
    t.noise.assign(n, {});
    for (auto& row : t.noise) row = rng.normals(d);
    return t;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

bool criterion1_weights_vs_oracles() {
    Rng rng(101);
    int checked = 0;
    while (checked < 500) {
        std::size_t n = 3 + rng.below(4);  // 3..6
        Graph g = random_graph(n, 0.55, rng);
        if (connected_components(g).size() != 1) continue;
        ++checked;
        EdgeWeightMap w = mas_edge_weights(g);
        auto all_mas = enumerate_mas(g);
        std::uint64_t total = count_spanning_trees(g);
        if (all_mas.size() != total) return false;
        for (const auto& [e, v] : w.weights) {
            std::size_t with_e = 0;
            for (const auto& subset : all_mas)
                if (std::find(subset.begin(), subset.end(), e) != subset.end()) ++with_e;
            if (std::abs(v - double(with_e) / double(total)) > 1e-9) return false;
            double ratio = double(count_spanning_trees_with_edge(g, e)) / double(total);
            if (std::abs(v - ratio) > 1e-9) return false;
        }
    }
    return true;
}

bool criterion2_propositions() {
    Rng rng(102);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 10 + rng.below(191);  // 10..200
        Graph g = random_graph(n, 3.0 / double(n), rng);
        double expected = double(n) - double(connected_components(g).size());
        if (std::abs(mas_edge_weights(g).sum() - expected) > 1e-8) return false;
    }
    for (std::size_t n = 3; n <= 20; ++n) {
        EdgeWeightMap w = mas_edge_weights(complete_graph(n));
        for (const auto& [e, v] : w.weights)
            if (std::abs(v - 2.0 / double(n)) > 1e-9) return false;
    }
    return true;
}

bool criterion3_cayley() {
    for (std::size_t n = 2; n <= 9; ++n) {
        std::uint64_t expected = 1;
        for (std::size_t k = 0; k + 2 < n; ++k) expected *= n;
        if (count_spanning_trees(complete_graph(n)) != expected) return false;
    }
    return true;
}

bool criterion4_gaussian_monte_carlo() {
    const int samples = 1000000;
    const std::size_t d = 2;
    Rng setting_rng(104);
    for (int setting = 0; setting < 20; ++setting) {
        DiagGaussian a = random_diag(d, setting_rng);
        DiagGaussian b = random_diag(d, setting_rng);
        std::vector<double> rho;
        for (std::size_t k = 0; k < d; ++k) rho.push_back(std::tanh(setting_rng.normal()));
        PairGaussian pair{a, b, rho};
        PriorConfig prior{0.3 + 0.6 * setting_rng.uniform(), d};
        Rng rng(9000 + setting);

        McEstimate mc_kl1, mc_klp, mc_mi, mc_cross, mc_dist;
        for (int s = 0; s < samples; ++s) {
            // singleton KL under a
            double v1 = 0.0;
            std::vector<double> eps = rng.normals(2 * d);
            for (std::size_t k = 0; k < d; ++k) {
                double z = a.mu[k] + a.sigma[k] * eps[k];
                v1 += log_density_1d(z, a.mu[k], a.sigma[k]) - log_density_1d(z, 0.0, 1.0);
            }
            mc_kl1.add(v1);

            // pair KL, MI, distance under the joint pair density
            auto [za, zb] = sample_pair(pair, eps);
            double vp = 0.0, vmi = 0.0, vd = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                double lq = log_density_2d(za[k], zb[k], a.mu[k], b.mu[k], a.sigma[k], b.sigma[k],
                                           rho[k]);
                vp += lq - log_density_2d(za[k], zb[k], 0, 0, 1, 1, prior.tau);
                vmi += lq - log_density_1d(za[k], a.mu[k], a.sigma[k]) -
                       log_density_1d(zb[k], b.mu[k], b.sigma[k]);
                double diff = za[k] - zb[k];
                vd += diff * diff;
            }
            mc_klp.add(vp);
            mc_mi.add(vmi);
            mc_dist.add(vd);

            // cross ratio under independent marginals (reuse eps, independent pair)
            double vc = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                double za2 = a.mu[k] + a.sigma[k] * eps[k];
                double zb2 = b.mu[k] + b.sigma[k] * eps[d + k];
                vc += log_density_2d(za2, zb2, 0, 0, 1, 1, prior.tau) -
                      log_density_1d(za2, 0, 1) - log_density_1d(zb2, 0, 1);
            }
            mc_cross.add(vc);
        }
        if (std::abs(kl_singleton(a) - mc_kl1.mean) > 3.0 * mc_kl1.stderr_()) return false;
        if (std::abs(kl_pair(pair, prior) - mc_klp.mean) > 3.0 * mc_klp.stderr_()) return false;
        if (std::abs(mutual_information(pair) - mc_mi.mean) > 3.0 * mc_mi.stderr_()) return false;
        if (std::abs(cross_ratio_expectation(a, b, prior) - mc_cross.mean) >
            3.0 * mc_cross.stderr_())
            return false;
        if (std::abs(expected_sq_distance(a, b, rho) - mc_dist.mean) > 3.0 * mc_dist.stderr_())
            return false;
    }
    return true;
}

bool criterion5_objective_identities() {
    const double tol = 1e-10;

    // edgeless: everything equals the plain ELBO
    TinyInstance empty = tiny_instance(5, 6, 2, {}, 105);
    EdgeWeightMap no_weights;
    for (Variant variant : {Variant::CvaeInd, Variant::CvaeCorr}) {
        Rng rng = Rng::substream(205, "init");
        CvaeModel m = make_model(variant, Likelihood::Bernoulli, 6, 2, 4, 0.9, rng);
        double base = elbo_vae(m, empty.data, empty.noise).total;
        if (std::abs(elbo_cvae_ind_acyclic(m, empty.data, empty.graph, empty.noise).total - base) >
            tol)
            return false;
        if (std::abs(elbo_cvae_corr_acyclic(m, empty.data, empty.graph, empty.noise).total -
                     base) > tol)
            return false;
        if (std::abs(
                elbo_cvae_corr_general(m, empty.data, empty.graph, no_weights, empty.noise).total -
                base) > tol)
            return false;
    }

    // acyclic: general (weights all 1) equals the acyclic closed form
    TinyInstance tree = tiny_instance(6, 6, 2, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {3, 5}}, 305);
    EdgeWeightMap tree_w = mas_edge_weights(tree.graph);
    {
        Rng rng = Rng::substream(405, "init");
        CvaeModel m = make_model(Variant::CvaeCorr, Likelihood::Bernoulli, 6, 2, 4, 0.9, rng);
        double general = elbo_cvae_corr_general(m, tree.data, tree.graph, tree_w, tree.noise).total;
        double acyclic = elbo_cvae_corr_acyclic(m, tree.data, tree.graph, tree.noise).total;
        if (std::abs(general - acyclic) > tol) return false;
    }

    // rho == 0: corr equals ind
    TinyInstance cyc = tiny_instance(6, 6, 2, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {4, 5}},
                                     505);
    EdgeWeightMap cyc_w = mas_edge_weights(cyc.graph);
    {
        Rng rng = Rng::substream(605, "init");
        CvaeModel corr = make_model(Variant::CvaeCorr, Likelihood::Bernoulli, 6, 2, 4, 0.9, rng);
        corr.pair_net.w2.assign(corr.pair_net.w2.size(), 0.0);
        corr.pair_net.b2.assign(corr.pair_net.b2.size(), 0.0);
        CvaeModel ind = corr;
        ind.variant = Variant::CvaeInd;
        ind.pair_net = Mlp{};
        double a = elbo_cvae_corr_general(corr, cyc.data, cyc.graph, cyc_w, cyc.noise).total;
        double b = elbo_cvae_corr_general(ind, cyc.data, cyc.graph, cyc_w, cyc.noise).total;
        if (std::abs(a - b) > tol) return false;

        // gamma == 0: NS loss equals the general objective
        double ns = loss_cvae_corr_ns(corr, cyc.data, cyc.graph, cyc_w, 0.0, cyc.noise).total;
        if (std::abs(ns - a) > tol) return false;
    }
    return true;
}

bool criterion6_gradient_fidelity() {
    TinyInstance t = tiny_instance(6, 8, 3, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {4, 5}}, 106);
    EdgeWeightMap w = mas_edge_weights(t.graph);
    struct Case {
        Variant variant;
        double gamma;
    };
    for (const Case& c : {Case{Variant::Vae, 0.0}, Case{Variant::CvaeInd, 0.0},
                          Case{Variant::CvaeCorr, 0.0}, Case{Variant::CvaeCorr, 0.7}}) {
        Rng rng = Rng::substream(206, "init");
        CvaeModel m = make_model(c.variant, Likelihood::Bernoulli, 8, 3, 5, 0.9, rng);
        ModelGrads grads(m);
        full_objective(m, t.data, t.graph, w, c.gamma, t.noise, &grads);
        CvaeModel probe = m;
        auto loss = [&](const std::vector<double>& p) {
            unflatten_params(probe, p);
            return full_objective(probe, t.data, t.graph, w, c.gamma, t.noise).total;
        };
        GradCheckReport rep = grad_check(loss, flatten_params(m), grads.flatten());
        if (rep.max_rel_error >= 1e-4) return false;
    }
    return true;
}

bool criterion7_naive_divergence() {
    std::vector<double> sigma = {0.9, 1.1, 1.0, 0.95};

    // naive loss: strictly increasing at tau = 0.99, strictly decreasing at 0.3
    if (!(naive_loss_k4(1.0, 0.99, sigma) > naive_loss_k4(0.0, 0.99, sigma))) return false;
    if (!(naive_loss_k4(10.0, 0.99, sigma) > naive_loss_k4(1.0, 0.99, sigma))) return false;
    if (!(naive_loss_k4(10.0, 0.3, sigma) < naive_loss_k4(0.0, 0.3, sigma))) return false;

    // the weighted prior terms on K4 (w = 1/2 per edge) stay bounded at tau=0.99:
    // value must decrease along the same mu sweep instead of diverging upward
    PriorConfig prior{0.99, 1};
    auto weighted_value = [&](double mu) {
        std::vector<DiagGaussian> q;
        for (int i = 0; i < 4; ++i) q.push_back({{mu}, {sigma[i]}});
        double val = 0.0;
        for (int i = 0; i < 4; ++i) val -= kl_singleton(q[i]);
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                PairGaussian pair{q[i], q[j], {0.0}};
                double bracket = kl_pair(pair, prior) - kl_singleton(q[i]) - kl_singleton(q[j]);
                val -= 0.5 * bracket;
            }
        return val;
    };
    if (!(weighted_value(1.0) < weighted_value(0.0))) return false;
    if (!(weighted_value(10.0) < weighted_value(1.0))) return false;
    return true;
}

bool criterion8_minibatch_unbiased() {
    TinyInstance t = tiny_instance(
        8, 6, 2,
        {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {0, 7}, {1, 6}, {2, 5}}, 108);
    EdgeWeightMap w = mas_edge_weights(t.graph);
    Rng rng = Rng::substream(208, "init");
    CvaeModel m = make_model(Variant::CvaeCorr, Likelihood::Bernoulli, 6, 2, 4, 0.9, rng);
    const double gamma = 0.8;

    NoiseMatrix zero_noise(8, std::vector<double>(2, 0.0));
    double full = full_objective(m, t.data, t.graph, w, gamma, zero_noise).total;

    Rng batch_rng = Rng::substream(308, "batch");
    double sum = 0.0, sumsq = 0.0;
    const int resamples = 10000;
    for (int s = 0; s < resamples; ++s) {
        Batch b = sample_batch(m, t.graph, 3, 4, batch_rng, batch_rng);
        for (auto& row : b.noise) row.assign(2, 0.0);
        double v = batch_objective(m, t.data, t.graph, w, gamma, b).total;
        sum += v;
        sumsq += v * v;
    }
    double mean = sum / resamples;
    double se = std::sqrt((sumsq / resamples - mean * mean) / resamples);
    return std::abs(mean - full) < 3.0 * se;
}

CvaeModel train_variant(Variant variant, const DataMatrix& data, const Graph& graph,
                        std::size_t latent_dim, std::size_t hidden, std::size_t epochs, double lr,
                        double gamma, std::uint64_t seed) {
    Rng rng = Rng::substream(seed, "init");
    CvaeModel m =
        make_model(variant, Likelihood::Bernoulli, data[0].size(), latent_dim, hidden, 0.99, rng);
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.lr = lr;
    cfg.gamma = gamma;
    cfg.seed = seed;
    cfg.hidden_dim = hidden;
    train(m, data, graph, cfg);
    return m;
}

bool criterion9_desk_scale() {
    // clustering: tree-GMM, n=500, D=50, d=8, tau=0.99, 5 seeds
    std::vector<double> nmi_vae, nmi_ind, nmi_corr;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SyntheticDataset ds = gen_tree_dataset(500, 50, 8, 0.99, seed);
        auto eval_nmi = [&](Variant variant) {
            CvaeModel m = train_variant(variant, ds.x, ds.graph, 8, 32, 600, 3e-3,
                                        variant == Variant::CvaeCorr ? 1.0 : 0.0, 100 + seed);
            DistanceMatrix dis = distance_matrix(
                m, ds.x,
                variant == Variant::CvaeCorr ? DistanceMode::Correlated
                                             : DistanceMode::Independent);
            return nmi(spectral_cluster(dis), ds.labels);
        };
        nmi_vae.push_back(eval_nmi(Variant::Vae));
        nmi_ind.push_back(eval_nmi(Variant::CvaeInd));
        nmi_corr.push_back(eval_nmi(Variant::CvaeCorr));
    }
    std::printf("  clustering medians: vae %.3f, ind %.3f, corr %.3f\n", median(nmi_vae),
                median(nmi_ind), median(nmi_corr));
    if (!(median(nmi_ind) > median(nmi_vae))) return false;
    if (!(median(nmi_corr) > median(nmi_vae))) return false;

    // matching: m=200 dual pairs, D=50
    std::vector<double> rr_vae, rr_ind;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng zrng = Rng::substream(900 + seed, "dual-z");
        std::vector<std::vector<double>> z(200);
        for (auto& row : z) row = zrng.normals(8);
        DataMatrix x = decode_to_bernoulli(z, 50, 900 + seed);
        DualUserDataset dual = split_dual_users(x, 900 + seed);
        DataMatrix data = dual.xa;
        data.insert(data.end(), dual.xb.begin(), dual.xb.end());
        std::vector<std::size_t> pairing(400);
        for (std::size_t i = 0; i < 200; ++i) {
            pairing[i] = 200 + i;
            pairing[200 + i] = i;
        }
        auto eval_rr = [&](Variant variant) {
            CvaeModel m =
                train_variant(variant, data, dual.graph, 8, 32, 2000, 3e-3, 0.0, 500 + seed);
            DistanceMatrix dis = distance_matrix(m, data, DistanceMode::Independent);
            return matching_rr(dis, pairing).value;
        };
        rr_vae.push_back(eval_rr(Variant::Vae));
        rr_ind.push_back(eval_rr(Variant::CvaeInd));
    }
    std::printf("  matching medians: vae %.3f, ind %.3f\n", median(rr_vae), median(rr_ind));
    return median(rr_ind) > median(rr_vae);
}

bool criterion10_determinism() {
    auto pipeline = [] {
        SyntheticDataset ds = gen_tree_dataset(40, 16, 3, 0.95, 11);
        CvaeModel m = train_variant(Variant::CvaeCorr, ds.x, ds.graph, 3, 8, 5, 1e-3, 1.0, 12);
        DistanceMatrix dis = distance_matrix(m, ds.x, DistanceMode::Correlated);
        EvalReport rep;
        rep.metric = "clustering_nmi";
        rep.value = nmi(spectral_cluster(dis), ds.labels);
        return model_to_json(m, 12).dump() + "|" + report_to_json(rep, "{}");
    };
    return pipeline() == pipeline();
}

}  // namespace

int main() {
    run_criterion(1, "weights vs enumeration oracles", criterion1_weights_vs_oracles);
    run_criterion(2, "weight sum and complete graphs", criterion2_propositions);
    run_criterion(3, "Cayley spanning-tree counts", criterion3_cayley);
    run_criterion(4, "Gaussian closed forms vs MC", criterion4_gaussian_monte_carlo);
    run_criterion(5, "objective identities", criterion5_objective_identities);
    run_criterion(6, "gradient fidelity", criterion6_gradient_fidelity);
    run_criterion(7, "naive-loss divergence regression", criterion7_naive_divergence);
    run_criterion(8, "minibatch unbiasedness", criterion8_minibatch_unbiased);
    run_criterion(9, "desk-scale directional results", criterion9_desk_scale);
    run_criterion(10, "pipeline determinism", criterion10_determinism);
    return g_failures == 0 ? 0 : 1;
}

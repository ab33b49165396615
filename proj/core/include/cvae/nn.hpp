#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvae/rng.hpp"

namespace cvae {

enum class Activation { Tanh, Relu };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Two-layer feedforward net: y = W2 * act(W1 * x + b1) + b2.
// W1 is hidden x in, W2 is out x hidden, both row-major.
struct Mlp {
    std::size_t in_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t out_dim = 0;
    Activation act = Activation::Tanh;
    std::vector<double> w1, b1, w2, b2;

    std::size_t param_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> flat);
};

// Glorot-uniform weights, zero biases.
Mlp make_mlp(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim, Activation act,
             Rng& rng);

struct MlpCache {
    std::vector<double> x;    // input
    std::vector<double> pre;  // W1 x + b1
    std::vector<double> h;    // act(pre)
};

std::vector<double> forward(const Mlp& net, std::span<const double> x, MlpCache* cache = nullptr);

struct MlpGrads {
    std::vector<double> w1, b1, w2, b2;

    explicit MlpGrads(const Mlp& net)
        : w1(net.w1.size(), 0.0),
          b1(net.b1.size(), 0.0),
          w2(net.w2.size(), 0.0),
          b2(net.b2.size(), 0.0) {}

    std::vector<double> flatten() const;
    void scale(double f);
};

// Accumulates parameter gradients of dy^T y into `acc` and returns dx.
std::vector<double> backward(const Mlp& net, const MlpCache& cache, std::span<const double> dy,
                             MlpGrads& acc);

struct AdamState {
    std::size_t step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;
    std::vector<double> m, v;

    explicit AdamState(std::size_t param_count, double lr_ = 1e-3)
        : lr(lr_), m(param_count, 0.0), v(param_count, 0.0) {}
};

// One Adam descent step (params -= lr * mhat / (sqrt(vhat) + eps_hat)).
// Throws NonFiniteGradient on non-finite gradient entries.
void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state);

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
};

// Central finite differences against the analytic gradient. The loss must be
// deterministic in its parameters (freeze any noise draws before calling).
GradCheckReport grad_check(const std::function<double(const std::vector<double>&)>& loss_fn,
                           const std::vector<double>& params,
                           const std::vector<double>& analytic_grad, double h = 1e-5);

nlohmann::json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);

}  // namespace cvae

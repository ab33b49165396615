#include "cvae/nn.hpp"

#include <algorithm>
#include <cmath>

#include "cvae/errors.hpp"

namespace cvae {

std::string activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "relu";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    throw InvalidInput("unknown activation: " + name);
}

std::vector<double> Mlp::flatten() const {
    std::vector<double> out;
    out.reserve(param_count());
    out.insert(out.end(), w1.begin(), w1.end());
    out.insert(out.end(), b1.begin(), b1.end());
    out.insert(out.end(), w2.begin(), w2.end());
    out.insert(out.end(), b2.begin(), b2.end());
    return out;
}

void Mlp::unflatten(std::span<const double> flat) {
    if (flat.size() != param_count()) throw InvalidInput("Mlp::unflatten: size mismatch");
    auto it = flat.begin();
    std::copy(it, it + w1.size(), w1.begin());
    it += w1.size();
    std::copy(it, it + b1.size(), b1.begin());
    it += b1.size();
    std::copy(it, it + w2.size(), w2.begin());
    it += w2.size();
    std::copy(it, it + b2.size(), b2.begin());
}

std::vector<double> MlpGrads::flatten() const {
    std::vector<double> out;
    out.reserve(w1.size() + b1.size() + w2.size() + b2.size());
    out.insert(out.end(), w1.begin(), w1.end());
    out.insert(out.end(), b1.begin(), b1.end());
    out.insert(out.end(), w2.begin(), w2.end());
    out.insert(out.end(), b2.begin(), b2.end());
    return out;
}

void MlpGrads::scale(double f) {
    for (auto* v : {&w1, &b1, &w2, &b2})
        for (double& x : *v) x *= f;
}

Mlp make_mlp(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim, Activation act,
             Rng& rng) {
    Mlp net;
    net.in_dim = in_dim;
    net.hidden_dim = hidden_dim;
    net.out_dim = out_dim;
    net.act = act;
    net.w1.resize(hidden_dim * in_dim);
    net.b1.assign(hidden_dim, 0.0);
    net.w2.resize(out_dim * hidden_dim);
    net.b2.assign(out_dim, 0.0);
    double lim1 = std::sqrt(6.0 / static_cast<double>(in_dim + hidden_dim));
    for (double& w : net.w1) w = (2.0 * rng.uniform() - 1.0) * lim1;
    double lim2 = std::sqrt(6.0 / static_cast<double>(hidden_dim + out_dim));
    for (double& w : net.w2) w = (2.0 * rng.uniform() - 1.0) * lim2;
    return net;
}

std::vector<double> forward(const Mlp& net, std::span<const double> x, MlpCache* cache) {
    if (x.size() != net.in_dim) throw InvalidInput("forward: input size mismatch");
    std::vector<double> pre(net.hidden_dim);
    for (std::size_t h = 0; h < net.hidden_dim; ++h) {
        double s = net.b1[h];
        const double* row = net.w1.data() + h * net.in_dim;
        for (std::size_t i = 0; i < net.in_dim; ++i) s += row[i] * x[i];
        pre[h] = s;
    }
    std::vector<double> hid(net.hidden_dim);
    if (net.act == Activation::Tanh) {
        for (std::size_t h = 0; h < net.hidden_dim; ++h) hid[h] = std::tanh(pre[h]);
    } else {
        for (std::size_t h = 0; h < net.hidden_dim; ++h) hid[h] = pre[h] > 0.0 ? pre[h] : 0.0;
    }
    std::vector<double> y(net.out_dim);
    for (std::size_t o = 0; o < net.out_dim; ++o) {
        double s = net.b2[o];
        const double* row = net.w2.data() + o * net.hidden_dim;
        for (std::size_t h = 0; h < net.hidden_dim; ++h) s += row[h] * hid[h];
        y[o] = s;
    }
    if (cache) {
        cache->x.assign(x.begin(), x.end());
        cache->pre = std::move(pre);
        cache->h = std::move(hid);
    }
    return y;
}

std::vector<double> backward(const Mlp& net, const MlpCache& cache, std::span<const double> dy,
                             MlpGrads& acc) {
    if (cache.x.size() != net.in_dim || cache.h.size() != net.hidden_dim) {
        throw InvalidState("backward: cache does not match network shape");
    }
    if (dy.size() != net.out_dim) throw InvalidInput("backward: dy size mismatch");

    std::vector<double> dh(net.hidden_dim, 0.0);
    for (std::size_t o = 0; o < net.out_dim; ++o) {
        acc.b2[o] += dy[o];
        double* grow = acc.w2.data() + o * net.hidden_dim;
        const double* wrow = net.w2.data() + o * net.hidden_dim;
        for (std::size_t h = 0; h < net.hidden_dim; ++h) {
            grow[h] += dy[o] * cache.h[h];
            dh[h] += dy[o] * wrow[h];
        }
    }
    std::vector<double> dpre(net.hidden_dim);
    if (net.act == Activation::Tanh) {
        for (std::size_t h = 0; h < net.hidden_dim; ++h)
            dpre[h] = dh[h] * (1.0 - cache.h[h] * cache.h[h]);
    } else {
        for (std::size_t h = 0; h < net.hidden_dim; ++h)
            dpre[h] = cache.pre[h] > 0.0 ? dh[h] : 0.0;
    }
    std::vector<double> dx(net.in_dim, 0.0);
    for (std::size_t h = 0; h < net.hidden_dim; ++h) {
        acc.b1[h] += dpre[h];
        double* grow = acc.w1.data() + h * net.in_dim;
        const double* wrow = net.w1.data() + h * net.in_dim;
        for (std::size_t i = 0; i < net.in_dim; ++i) {
            grow[i] += dpre[h] * cache.x[i];
            dx[i] += dpre[h] * wrow[i];
        }
    }
    return dx;
}

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw InvalidInput("adam_step: size mismatch");
    }
    for (double g : grads) {
        if (!std::isfinite(g)) throw NonFiniteGradient("adam_step: non-finite gradient entry");
    }
    state.step += 1;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps_hat);
    }
}

GradCheckReport grad_check(const std::function<double(const std::vector<double>&)>& loss_fn,
                           const std::vector<double>& params,
                           const std::vector<double>& analytic_grad, double h) {
    if (params.size() != analytic_grad.size()) throw InvalidInput("grad_check: size mismatch");
    GradCheckReport report;
    std::vector<double> p = params;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double orig = p[i];
        p[i] = orig + h;
        double fp = loss_fn(p);
        p[i] = orig - h;
        double fm = loss_fn(p);
        p[i] = orig;
        double fd = (fp - fm) / (2.0 * h);
        double a = analytic_grad[i];
        double rel = std::abs(fd - a) / std::max({std::abs(fd), std::abs(a), 1.0});
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_index = i;
        }
    }
    return report;
}

nlohmann::json mlp_to_json(const Mlp& net) {
    nlohmann::json j;
    j["in_dim"] = net.in_dim;
    j["hidden_dim"] = net.hidden_dim;
    j["out_dim"] = net.out_dim;
    j["activation"] = activation_name(net.act);
    j["W1"] = net.w1;
    j["b1"] = net.b1;
    j["W2"] = net.w2;
    j["b2"] = net.b2;
    return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
    Mlp net;
    net.in_dim = j.at("in_dim").get<std::size_t>();
    net.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    net.out_dim = j.at("out_dim").get<std::size_t>();
    net.act = activation_from_name(j.at("activation").get<std::string>());
    net.w1 = j.at("W1").get<std::vector<double>>();
    net.b1 = j.at("b1").get<std::vector<double>>();
    net.w2 = j.at("W2").get<std::vector<double>>();
    net.b2 = j.at("b2").get<std::vector<double>>();
    if (net.w1.size() != net.hidden_dim * net.in_dim || net.b1.size() != net.hidden_dim ||
        net.w2.size() != net.out_dim * net.hidden_dim || net.b2.size() != net.out_dim) {
        throw InvalidInput("mlp_from_json: tensor shapes inconsistent");
    }
    return net;
}

}  // namespace cvae

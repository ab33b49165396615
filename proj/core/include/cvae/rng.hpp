#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace cvae {

// Counter-free deterministic RNG. All randomness in the project flows from a
// single user seed through named substreams so that e.g. batch sampling can be
// re-run independently of noise draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // avoid the all-zero fixed point and decorrelate small seeds
        next();
        next();
    }

    static std::uint64_t derive(std::uint64_t seed, std::string_view stream) {
        // FNV-1a over the stream name, mixed with the seed
        std::uint64_t h = 14695981039346656037ull;
        for (char c : stream) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return splitmix(seed ^ h);
    }

    static Rng substream(std::uint64_t seed, std::string_view stream) {
        return Rng(derive(seed, stream));
    }

    std::uint64_t next() {
        // splitmix64
        state_ += 0x9E3779B97F4A7C15ull;
        return splitmix_mix(state_);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, bound)
    std::uint64_t below(std::uint64_t bound) {
        // modulo bias is negligible for bound << 2^64
        return next() % bound;
    }

    // standard normal via Box-Muller (pair cached)
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::vector<double> normals(std::size_t count) {
        std::vector<double> out(count);
        for (auto& v : out) v = normal();
        return out;
    }

    // Fisher-Yates sample of k distinct indices from [0, n)
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    static std::uint64_t splitmix_mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static std::uint64_t splitmix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        return splitmix_mix(z);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cvae

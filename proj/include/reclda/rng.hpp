#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace reclda {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of `base`. Distinct indices give unrelated streams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return mix64(mix64(base) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept {
    return derive_seed(derive_seed(base, a), b);
}

/// Seeded generator. Uniforms and bounded integers are computed from the raw
/// mt19937_64 stream so results do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling on the top of the range keeps it unbiased
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Gamma(shape, 1) draw.
    double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }

    /// log of a Gamma(shape, 1) draw; stays finite for very small shapes
    /// where the draw itself would underflow.
    double log_gamma_draw(double shape) {
        if (shape >= 1.0) return std::log(gamma(shape));
        // G(a) = G(a + 1) * U^(1/a)
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return std::log(gamma(shape + 1.0)) + std::log(u) / shape;
    }

    /// Symmetric or general Dirichlet draw, computed in log space and normalized.
    std::vector<double> dirichlet(std::span<const double> concentration) {
        std::vector<double> out(concentration.size());
        double max_log = -INFINITY;
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = log_gamma_draw(concentration[i]);
            max_log = std::max(max_log, out[i]);
        }
        double total = 0.0;
        for (auto& v : out) {
            v = std::exp(v - max_log);
            total += v;
        }
        for (auto& v : out) v /= total;
        return out;
    }

    std::vector<double> symmetric_dirichlet(std::size_t n, double concentration) {
        std::vector<double> c(n, concentration);
        return dirichlet(c);
    }

    /// Index drawn proportionally to non-negative `weights` with precomputed `total`.
    std::size_t categorical(std::span<const double> weights, double total) {
        double u = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        // rounding left u marginally positive; take the last nonzero weight
        for (std::size_t i = weights.size(); i-- > 0;) {
            if (weights[i] > 0.0) return i;
        }
        return weights.size() - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle driven by Rng::below, stable across platforms.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

/// 64-bit FNV-1a over bytes, used for fingerprints.
class Fnv1a {
public:
    void add(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001b3ULL;
        }
    }
    template <typename T>
    void add_value(const T& v) { add(&v, sizeof(T)); }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace reclda

#pragma once

// Reproducible random streams. Each stream is an mt19937_64 seeded through
// std::seed_seq from (seed, domain, index); both are fully specified by the
// standard, so a stream depends only on those three numbers. The variate
// transforms below are written out rather than taken from <random>
// distributions, whose algorithms are implementation-defined.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace ratebound {

/// Separates stream families derived from one user seed.
enum class StreamDomain : std::uint32_t {
    Trial = 1,
    SyntheticItem = 2,
    SyntheticAlpha = 3,
};

class RandomStream {
public:
    RandomStream(std::uint64_t seed, StreamDomain domain, std::uint64_t index)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t bits() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1); safe for log().
    double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound)
    {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return x % bound;
    }

    /// Standard normal, Marsaglia polar method.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        double v = 0.0;
        double s = 0.0;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        has_spare_ = true;
        return u * scale;
    }

    /// log of a Gamma(shape, 1) variate. Working in log space keeps tiny
    /// shapes (which produce values far below the smallest double) usable.
    double log_gamma(double shape)
    {
        if (shape < 1.0) {
            // G(a) = G(a + 1) * U^(1/a)
            return log_gamma(shape + 1.0) + std::log(uniform_open()) / shape;
        }
        // Marsaglia & Tsang.
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = 0.0;
            double v = 0.0;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_open();
            if (u < 1.0 - 0.0331 * x * x * x * x || std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
                return std::log(d * v);
            }
        }
    }

    /// Index drawn from a probability vector by inverse CDF.
    std::size_t categorical(std::span<const double> probs)
    {
        const double u = uniform();
        double cumulative = 0.0;
        for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
            cumulative += probs[k];
            if (u < cumulative) {
                return k;
            }
        }
        return probs.size() - 1;
    }

    /// Fills `out` with a Dirichlet(alpha) draw via normalised gamma variates.
    void dirichlet(std::span<const double> alpha, std::span<double> out)
    {
        double max_log = -INFINITY;
        for (std::size_t k = 0; k < alpha.size(); ++k) {
            out[k] = log_gamma(alpha[k]);
            max_log = std::max(max_log, out[k]);
        }
        double sum = 0.0;
        for (double& x : out) {
            x = std::exp(x - max_log);
            sum += x;
        }
        for (double& x : out) {
            x /= sum;
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace ratebound

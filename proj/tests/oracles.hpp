#pragma once

// Test-only reference computations, kept independent of the library code
// paths they are used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

inline std::vector<double> reference_alpha()
{
    return {4.0 / 35, 25.0 / 35, 3.0 / 35, 2.0 / 35, 1.0 / 35};
}

/// Textbook quadratic formula for the positive root of a x^2 + b x - c = 0.
inline double positive_root(double a, double b, double c)
{
    return (-b + std::sqrt(b * b + 4.0 * a * c)) / (2.0 * a);
}

/// Calls fn(counts) for every composition of n into m non-negative parts.
inline void for_each_composition(int m, int n, const std::function<void(const std::vector<int>&)>& fn)
{
    std::vector<int> counts(static_cast<std::size_t>(m), 0);
    std::function<void(int, int)> rec = [&](int level, int left) {
        if (level == m - 1) {
            counts[static_cast<std::size_t>(level)] = left;
            fn(counts);
            return;
        }
        for (int c = 0; c <= left; ++c) {
            counts[static_cast<std::size_t>(level)] = c;
            rec(level + 1, left - c);
        }
    };
    rec(0, n);
}

inline double multinomial_pmf(const std::vector<int>& counts, const std::vector<double>& p)
{
    int n = 0;
    double log_p = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        n += counts[k];
        log_p -= std::lgamma(counts[k] + 1.0);
        if (counts[k] > 0) {
            if (p[k] <= 0.0) {
                return 0.0;
            }
            log_p += counts[k] * std::log(p[k]);
        }
    }
    log_p += std::lgamma(n + 1.0);
    return std::exp(log_p);
}

/// Exact P[majority label (lowest-level tie-break) != label] for n draws
/// from the rating pmf p, by enumeration.
inline double exact_majority_miss(const std::vector<double>& p, int n, int label)
{
    double miss = 0.0;
    for_each_composition(static_cast<int>(p.size()), n, [&](const std::vector<int>& counts) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < counts.size(); ++k) {
            if (counts[k] > counts[best]) {
                best = k;
            }
        }
        if (static_cast<int>(best) + 1 != label) {
            miss += multinomial_pmf(counts, p);
        }
    });
    return miss;
}

/// Rating pmf of a population where a fraction f rates uniformly at random.
inline std::vector<double> random_mixture(const std::vector<double>& alpha, double f)
{
    std::vector<double> p;
    for (double a : alpha) {
        p.push_back(f / static_cast<double>(alpha.size()) + (1.0 - f) * a);
    }
    return p;
}

/// Rating pmf when a fraction f always rates `target` (1-based).
inline std::vector<double> biased_mixture(const std::vector<double>& alpha, double f, int target)
{
    std::vector<double> p;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        p.push_back((1.0 - f) * alpha[k] + (static_cast<int>(k) + 1 == target ? f : 0.0));
    }
    return p;
}

/// Survival function of the chi-square distribution with 4 degrees of freedom.
inline double chi2_sf_df4(double x)
{
    return std::exp(-x / 2.0) * (1.0 + x / 2.0);
}

} // namespace oracle

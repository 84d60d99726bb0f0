#pragma once

// Seeded generative sampler with misbehaviour injection, and Monte Carlo
// estimators of majority failure rates and average-rule error quantiles.
//
// Trial t always draws from RandomStream(seed, Trial, t), so results do not
// depend on the number of worker threads or the order trials complete in.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "ratebound/aggregation.hpp"
#include "ratebound/error.hpp"
#include "ratebound/rating_model.hpp"
#include "ratebound/rng.hpp"

namespace ratebound {

enum class Sampler {
    TwoStage, // per-rater pmf rho ~ Dirichlet(alpha), then rating ~ Categorical(rho)
    Marginal, // rating ~ Categorical(alpha)
};

enum class AttackerAssignment {
    Iid,        // each rating is adversarial independently with probability f
    ExactCount, // exactly floor(f * n) adversarial ratings per set
};

struct SimConfig {
    DirichletParams params;
    MisbehaviorProfile profile = MisbehaviorProfile::honest();
    std::uint64_t n = 1;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    Sampler sampler = Sampler::Marginal;
    AttackerAssignment assignment = AttackerAssignment::Iid;
    /// 0 means std::thread::hardware_concurrency(). Never affects results.
    unsigned threads = 0;

    void validate() const
    {
        if (n < 1) {
            fail(ErrorCode::InvalidInputs, "ratings per trial must be >= 1");
        }
        if (trials < 1) {
            fail(ErrorCode::InvalidInputs, "trials must be >= 1");
        }
        profile.check_scale(params.scale());
    }
};

struct FailureEstimate {
    double rate = 0.0;
    double std_err = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
};

inline FailureEstimate make_failure_estimate(std::uint64_t failures, std::uint64_t trials)
{
    FailureEstimate est;
    est.trials = trials;
    est.failures = failures;
    est.rate = static_cast<double>(failures) / static_cast<double>(trials);
    est.std_err = std::sqrt(est.rate * (1.0 - est.rate) / static_cast<double>(trials));
    return est;
}

/// Draws exactly one rating per call from the configured population.
class RatingSampler {
public:
    RatingSampler(const DirichletParams& params, MisbehaviorProfile profile, Sampler sampler)
        : alpha_(params.alpha().begin(), params.alpha().end()), rho_(alpha_.size()), profile_(profile),
          sampler_(sampler)
    {
    }

    int honest(RandomStream& rng)
    {
        if (sampler_ == Sampler::TwoStage) {
            rng.dirichlet(alpha_, rho_);
            return static_cast<int>(rng.categorical(rho_)) + 1;
        }
        return static_cast<int>(rng.categorical(alpha_)) + 1;
    }

    int adversarial(RandomStream& rng)
    {
        if (profile_.kind() == MisbehaviorKind::Biased) {
            return profile_.target();
        }
        return static_cast<int>(rng.below(alpha_.size())) + 1;
    }

    int draw(RandomStream& rng)
    {
        if (profile_.kind() != MisbehaviorKind::Honest && rng.uniform() < profile_.fraction()) {
            return adversarial(rng);
        }
        return honest(rng);
    }

private:
    std::vector<double> alpha_;
    std::vector<double> rho_;
    MisbehaviorProfile profile_;
    Sampler sampler_;
};

/// Rating counts for one trial of the configured experiment.
inline RatingMultiset sample_rating_set(const SimConfig& config, std::uint64_t trial = 0)
{
    config.validate();
    RandomStream rng(config.seed, StreamDomain::Trial, trial);
    RatingSampler sampler(config.params, config.profile, config.sampler);
    RatingMultiset set(config.params.scale());
    if (config.assignment == AttackerAssignment::ExactCount && config.profile.kind() != MisbehaviorKind::Honest) {
        const auto attackers = static_cast<std::uint64_t>(
            std::floor(config.profile.fraction() * static_cast<double>(config.n)));
        for (std::uint64_t j = 0; j < config.n; ++j) {
            set.add(j < attackers ? sampler.adversarial(rng) : sampler.honest(rng));
        }
        return set;
    }
    for (std::uint64_t j = 0; j < config.n; ++j) {
        set.add(sampler.draw(rng));
    }
    return set;
}

inline unsigned resolve_threads(unsigned requested)
{
    if (requested != 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Evaluates fn(trial) for every trial index and returns results by index.
template <class Fn>
auto run_trials(std::uint64_t trials, unsigned threads, Fn fn)
{
    using Result = decltype(fn(std::uint64_t{0}));
    std::vector<Result> results(trials);
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads), trials));
    if (workers <= 1) {
        for (std::uint64_t t = 0; t < trials; ++t) {
            results[t] = fn(t);
        }
        return results;
    }
    std::atomic<std::uint64_t> next{0};
    constexpr std::uint64_t kChunk = 64;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::uint64_t begin = next.fetch_add(kChunk);
                    if (begin >= trials) {
                        return;
                    }
                    const std::uint64_t end = std::min(trials, begin + kChunk);
                    for (std::uint64_t t = begin; t < end; ++t) {
                        results[t] = fn(t);
                    }
                }
            });
        }
    }
    return results;
}

enum class FailureMode {
    MissTruth,   // failure: majority label differs from the true label
    AttackerWin, // failure: majority label differs from the attacker's target
};

/// Fraction of trials in which the majority rule fails. In AttackerWin mode
/// the comparison is against the biased profile's target instead, so the
/// complement of the returned rate is the attacker's win rate.
inline FailureEstimate estimate_failure_rate(const SimConfig& config, const GroundTruth& truth,
                                             FailureMode mode = FailureMode::MissTruth)
{
    config.validate();
    int expected = truth.label;
    if (mode == FailureMode::AttackerWin) {
        if (config.profile.kind() != MisbehaviorKind::Biased) {
            fail(ErrorCode::InvalidInputs, "attacker-win mode needs a biased profile");
        }
        expected = config.profile.target();
    }
    const auto outcomes = run_trials(config.trials, config.threads, [&](std::uint64_t t) -> std::uint8_t {
        const AggregateResult agg = majority_label(sample_rating_set(config, t));
        return *agg.label != expected ? 1 : 0;
    });
    std::uint64_t failures = 0;
    for (auto o : outcomes) {
        failures += o;
    }
    return make_failure_estimate(failures, config.trials);
}

/// Empirical quantile (nearest rank) of a sample; sorts a copy.
inline double empirical_quantile(std::vector<double> values, double quantile)
{
    if (values.empty()) {
        fail(ErrorCode::EmptyInput, "quantile of an empty sample");
    }
    if (!(quantile > 0.0 && quantile < 1.0)) {
        fail(ErrorCode::InvalidInputs, "quantile must lie in (0,1)");
    }
    std::sort(values.begin(), values.end());
    auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(values.size())));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

/// |average score - truth.mean| for every trial, indexed by trial.
inline std::vector<double> simulate_abs_errors(const SimConfig& config, const GroundTruth& truth)
{
    config.validate();
    return run_trials(config.trials, config.threads, [&](std::uint64_t t) {
        return std::abs(*average_score(sample_rating_set(config, t)).score - truth.mean);
    });
}

inline double estimate_abs_error_quantile(const SimConfig& config, const GroundTruth& truth, double quantile)
{
    if (!(quantile > 0.0 && quantile < 1.0)) {
        fail(ErrorCode::InvalidInputs, "quantile must lie in (0,1)");
    }
    return empirical_quantile(simulate_abs_errors(config, truth), quantile);
}

/// Per-level frequencies across all ratings of all trials.
inline std::vector<double> level_frequencies(const SimConfig& config)
{
    const auto sets = run_trials(config.trials, config.threads, [&](std::uint64_t t) {
        const RatingMultiset set = sample_rating_set(config, t);
        return std::vector<std::uint64_t>(set.counts().begin(), set.counts().end());
    });
    std::vector<double> freq(static_cast<std::size_t>(config.params.levels()), 0.0);
    std::uint64_t total = 0;
    for (const auto& counts : sets) {
        for (std::size_t k = 0; k < counts.size(); ++k) {
            freq[k] += static_cast<double>(counts[k]);
            total += counts[k];
        }
    }
    for (double& f : freq) {
        f /= static_cast<double>(total);
    }
    return freq;
}

} // namespace ratebound

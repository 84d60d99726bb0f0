#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ratebound/bounds.hpp"
#include "ratebound/simulation.hpp"

using namespace ratebound;

namespace {

const DirichletParams& reference()
{
    static const DirichletParams p(oracle::reference_alpha());
    return p;
}

SimConfig make_config(MisbehaviorProfile profile, std::uint64_t n, std::uint64_t trials, std::uint64_t seed)
{
    SimConfig c{reference()};
    c.profile = profile;
    c.n = n;
    c.trials = trials;
    c.seed = seed;
    return c;
}

} // namespace

TEST(Sampler, TwoStageFrequenciesMatchAlpha)
{
    auto c = make_config(MisbehaviorProfile::honest(), 1000, 1000, 11);
    c.sampler = Sampler::TwoStage;
    const auto freq = level_frequencies(c);
    const double draws = 1e6;
    for (int k = 1; k <= 5; ++k) {
        const double a = reference().at(k);
        EXPECT_NEAR(freq[k - 1], a, 3.0 * std::sqrt(a * (1 - a) / draws)) << "level " << k;
    }
}

TEST(Sampler, TwoStageAndMarginalAreIndistinguishable)
{
    auto two = make_config(MisbehaviorProfile::honest(), 1000, 1000, 12);
    two.sampler = Sampler::TwoStage;
    auto marg = two;
    marg.sampler = Sampler::Marginal;
    const auto f1 = level_frequencies(two);
    const auto f2 = level_frequencies(marg);
    const double n = 1e6;
    double stat = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        const double pooled = (f1[k] + f2[k]) / 2.0;
        stat += n * std::pow(f1[k] - pooled, 2) / pooled + n * std::pow(f2[k] - pooled, 2) / pooled;
    }
    EXPECT_GT(oracle::chi2_sf_df4(stat), 0.001) << "chi-square " << stat;
}

TEST(Sampler, SaturatedBiasedAttack)
{
    const DirichletParams p(oracle::reference_alpha());
    SimConfig c{p};
    c.profile = MisbehaviorProfile::biased(1.0, 3);
    c.n = 500;
    const auto set = sample_rating_set(c);
    EXPECT_EQ(set.count(3), 500U);
    EXPECT_EQ(set.total(), 500U);
}

TEST(Sampler, RandomMixtureArithmetic)
{
    const DirichletParams p({1.0 - kSmoothingFloor, kSmoothingFloor});
    SimConfig c{p};
    c.profile = MisbehaviorProfile::random(0.5);
    c.n = 1000;
    c.trials = 400;
    c.seed = 3;
    const auto freq = level_frequencies(c);
    EXPECT_NEAR(freq[1], 0.25, 3.0 * std::sqrt(0.25 * 0.75 / 4e5));
}

TEST(Sampler, ExactCountAssignment)
{
    auto c = make_config(MisbehaviorProfile::biased(0.3, 5), 100, 1, 4);
    c.assignment = AttackerAssignment::ExactCount;
    for (std::uint64_t t = 0; t < 50; ++t) {
        EXPECT_GE(sample_rating_set(c, t).count(5), 30U);
    }
    auto honest = make_config(MisbehaviorProfile::honest(), 100, 1, 4);
    auto honest_exact = honest;
    honest_exact.assignment = AttackerAssignment::ExactCount;
    EXPECT_EQ(sample_rating_set(honest, 3), sample_rating_set(honest_exact, 3));
}

TEST(Sampler, RejectsInvalidConfig)
{
    auto c = make_config(MisbehaviorProfile::biased(0.3, 6), 10, 1, 0);
    EXPECT_THROW(sample_rating_set(c), Error);
    c = make_config(MisbehaviorProfile::honest(), 0, 1, 0);
    EXPECT_THROW(sample_rating_set(c), Error);
}

TEST(FailureRate, HonestAtReferenceBound)
{
    const auto c = make_config(MisbehaviorProfile::honest(), 77, 10000, 1);
    const auto est = estimate_failure_rate(c, ground_truth(reference()));
    EXPECT_LE(est.rate, 0.2);
    EXPECT_EQ(est.trials, 10000U);
}

TEST(FailureRate, SingleRating)
{
    const auto c = make_config(MisbehaviorProfile::honest(), 1, 20000, 2);
    const auto est = estimate_failure_rate(c, ground_truth(reference()));
    const double expected = 10.0 / 35;
    EXPECT_NEAR(est.rate, expected, 3.0 * std::sqrt(expected * (1 - expected) / 20000));
}

TEST(FailureRate, MatchesExactEnumeration)
{
    const auto alpha = oracle::reference_alpha();
    struct Case {
        MisbehaviorProfile profile;
        std::vector<double> pmf;
    };
    const std::vector<Case> cases{
        {MisbehaviorProfile::honest(), alpha},
        {MisbehaviorProfile::random(0.2), oracle::random_mixture(alpha, 0.2)},
        {MisbehaviorProfile::biased(0.3, 5), oracle::biased_mixture(alpha, 0.3, 5)},
    };
    for (const auto& cs : cases) {
        for (int n : {3, 8, 15}) {
            const auto c = make_config(cs.profile, n, 20000, 5 + n);
            const auto est = estimate_failure_rate(c, ground_truth(reference()));
            const double exact = oracle::exact_majority_miss(cs.pmf, n, 2);
            EXPECT_NEAR(est.rate, exact, 4.0 * std::sqrt(exact * (1 - exact) / 20000) + 1e-9)
                << to_string(cs.profile.kind()) << " n=" << n;
        }
    }
}

TEST(FailureRate, NonIncreasingOnLadder)
{
    const auto n_prime = majority_honest_bound(reference(), 0.2).n_prime;
    double previous = 1.0;
    double previous_se = 0.0;
    for (auto n : {n_prime / 4, n_prime / 2, n_prime, 2 * n_prime}) {
        const auto c = make_config(MisbehaviorProfile::honest(), n, 10000, 9);
        const auto est = estimate_failure_rate(c, ground_truth(reference()));
        EXPECT_LE(est.rate, previous + 3.0 * std::hypot(est.std_err, previous_se)) << "n=" << n;
        previous = est.rate;
        previous_se = est.std_err;
    }
}

TEST(FailureRate, AttackerWinsAtWinBound)
{
    const auto bound = biased_win_bound(reference(), 0.2, 0.5, 5);
    const auto c = make_config(MisbehaviorProfile::biased(0.5, 5), bound.n_prime, 5000, 13);
    const auto est = estimate_failure_rate(c, ground_truth(reference()), FailureMode::AttackerWin);
    EXPECT_GE(1.0 - est.rate, 0.8);
}

TEST(FailureRate, AttackerWinNeedsBiasedProfile)
{
    const auto c = make_config(MisbehaviorProfile::honest(), 10, 10, 0);
    EXPECT_THROW(estimate_failure_rate(c, ground_truth(reference()), FailureMode::AttackerWin), Error);
}

TEST(FailureRate, ThresholdDichotomy)
{
    const auto truth = ground_truth(reference());
    const double threshold = biased_win_threshold(reference(), 5);

    const double above = 0.5;
    ASSERT_GT(above, threshold);
    const auto win = biased_win_bound(reference(), 0.2, above, 5);
    auto c = make_config(MisbehaviorProfile::biased(above, 5), 4 * win.n_prime, 2000, 21);
    EXPECT_GE(1.0 - estimate_failure_rate(c, truth, FailureMode::AttackerWin).rate, 0.99);

    const double below = 0.2;
    ASSERT_LT(below, threshold);
    const auto resist = biased_resist_bound(reference(), 0.2, below, 5);
    c = make_config(MisbehaviorProfile::biased(below, 5), 4 * resist.n_prime, 2000, 22);
    EXPECT_GE(1.0 - estimate_failure_rate(c, truth).rate, 0.99);
}

TEST(Quantile, EmpiricalNearestRank)
{
    EXPECT_DOUBLE_EQ(empirical_quantile({5, 1, 4, 2, 3}, 0.5), 3);
    EXPECT_DOUBLE_EQ(empirical_quantile({5, 1, 4, 2, 3}, 0.8), 4);
    EXPECT_DOUBLE_EQ(empirical_quantile({5, 1, 4, 2, 3}, 0.01), 1);
    EXPECT_DOUBLE_EQ(empirical_quantile({5, 1, 4, 2, 3}, 0.99), 5);
    EXPECT_THROW(empirical_quantile({}, 0.5), Error);
    EXPECT_THROW(empirical_quantile({1.0}, 1.0), Error);
}

TEST(Quantile, HonestWithinInterval)
{
    const double eps = 0.1;
    const double delta = 0.2;
    const auto interval = average_honest_interval(reference(), eps, delta);
    const auto n = static_cast<std::uint64_t>(std::ceil(interval.min_ratings));
    const auto c = make_config(MisbehaviorProfile::honest(), n, 4000, 31);
    const double q = estimate_abs_error_quantile(c, ground_truth(reference()), 1 - delta);
    EXPECT_LE(q, interval.upper);
}

TEST(Quantile, ShrinksWithMoreRatings)
{
    const double n_prime = average_min_ratings(0.1, 5, 0.2);
    const auto truth = ground_truth(reference());
    const auto small = make_config(MisbehaviorProfile::honest(), static_cast<std::uint64_t>(n_prime), 2000, 32);
    const auto large = make_config(MisbehaviorProfile::honest(), static_cast<std::uint64_t>(10 * n_prime), 2000, 33);
    const double q_small = estimate_abs_error_quantile(small, truth, 0.5);
    const double q_large = estimate_abs_error_quantile(large, truth, 0.5);
    EXPECT_GE(q_small / q_large, 2.0);
}

TEST(Quantile, PersistentBias)
{
    const auto truth = ground_truth(reference());
    const auto c = make_config(MisbehaviorProfile::biased(0.3, 5), 5000, 1000, 34);
    const double q = estimate_abs_error_quantile(c, truth, 0.5);
    EXPECT_GE(q, 0.5 * std::abs(5 - truth.mean) * 0.3);
}

TEST(Determinism, IndependentOfThreadCount)
{
    auto c = make_config(MisbehaviorProfile::random(0.2), 102, 3000, 77);
    c.threads = 1;
    const auto one = estimate_failure_rate(c, ground_truth(reference()));
    const auto errors_one = simulate_abs_errors(c, ground_truth(reference()));
    c.threads = 4;
    const auto four = estimate_failure_rate(c, ground_truth(reference()));
    const auto errors_four = simulate_abs_errors(c, ground_truth(reference()));
    EXPECT_EQ(one.failures, four.failures);
    EXPECT_EQ(errors_one, errors_four);
    c.threads = 3;
    c.sampler = Sampler::TwoStage;
    const auto a = level_frequencies(c);
    c.threads = 1;
    EXPECT_EQ(a, level_frequencies(c));
}

TEST(Determinism, RunTrialsKeepsIndexOrder)
{
    const auto out = run_trials(1000, 4, [](std::uint64_t t) { return t * t; });
    for (std::uint64_t t = 0; t < 1000; ++t) {
        ASSERT_EQ(out[t], t * t);
    }
}

#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ratebound/bounds.hpp"

using namespace ratebound;

namespace {

const DirichletParams& reference()
{
    static const DirichletParams p(oracle::reference_alpha());
    return p;
}

const double kGamma = 76.0 / 35;

ErrorCode code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::InvalidInputs;
}

} // namespace

TEST(Integerize, RoundsHalfUp)
{
    EXPECT_EQ(integerize(66.98), 67);
    EXPECT_EQ(integerize(76.64), 77);
    EXPECT_EQ(integerize(93.14), 93);
    EXPECT_EQ(integerize(102.5), 103);
    EXPECT_EQ(integerize(102.49), 102);
}

TEST(MajorityHonest, ReferenceValues)
{
    EXPECT_NEAR(majority_honest_bound(reference(), 0.3).n_prime, 67, 1);
    EXPECT_NEAR(majority_honest_bound(reference(), 0.2).n_prime, 77, 1);
    EXPECT_NEAR(majority_honest_bound(reference(), 0.1).n_prime, 93, 1);
}

TEST(MajorityHonest, TwoLevelDirectEvaluation)
{
    // 12 * 0.9 / 0.64 * ln 10, evaluated at 30 digits.
    const auto b = majority_honest_bound(DirichletParams({0.9, 0.1}), 0.2);
    EXPECT_NEAR(b.raw, 38.8561234442745209, 1e-9);
    EXPECT_EQ(b.n_prime, 39);
    EXPECT_LE(std::abs(static_cast<double>(b.n_prime) - b.raw), 0.5);
}

TEST(MajorityHonest, Errors)
{
    EXPECT_EQ(code_of([] { majority_honest_bound(reference(), 0.0); }), ErrorCode::InvalidDelta);
    EXPECT_EQ(code_of([] { majority_honest_bound(reference(), 1.0); }), ErrorCode::InvalidDelta);
    EXPECT_EQ(code_of([] { majority_honest_bound(DirichletParams({0.4, 0.4, 0.2}), 0.2); }),
              ErrorCode::DegenerateMajority);
}

TEST(MajorityRandom, ReferenceValues)
{
    EXPECT_EQ(majority_random_bound(reference(), 0.2, 0.0).n_prime, 77);
    EXPECT_NEAR(majority_random_bound(reference(), 0.2, 0.1).n_prime, 88, 1);
    EXPECT_NEAR(majority_random_bound(reference(), 0.2, 0.2).n_prime, 102, 1);
    EXPECT_EQ(majority_random_bound(reference(), 0.2, 0.0).raw, majority_honest_bound(reference(), 0.2).raw);
    EXPECT_EQ(code_of([] { majority_random_bound(reference(), 0.2, 1.0); }), ErrorCode::InvalidFraction);
}

TEST(BiasedThreshold, ReferenceValues)
{
    EXPECT_NEAR(biased_win_threshold(reference(), 5), 0.407, 5e-4);
    EXPECT_NEAR(biased_win_threshold(reference(), 1), 0.375, 5e-4);
    EXPECT_EQ(biased_win_threshold(reference(), 2), 0.0);
    EXPECT_EQ(code_of([] { biased_win_threshold(reference(), 6); }), ErrorCode::InvalidInputs);
}

TEST(BiasedWin, BothBranches)
{
    // 30-digit evaluations of the two branches.
    const auto against = biased_win_bound(reference(), 0.2, 0.5, 5);
    EXPECT_NEAR(against.raw, 804.452933421606534, 1e-8);
    const auto reinforcing = biased_win_bound(reference(), 0.2, 0.1, 2);
    EXPECT_NEAR(reinforcing.raw, 70.0536591349664226, 1e-9);
    EXPECT_LT(reinforcing.n_prime, 77);
    EXPECT_EQ(code_of([] { biased_win_bound(reference(), 0.2, 0.3, 5); }), ErrorCode::BelowThreshold);
}

TEST(BiasedResist, ReferenceValues)
{
    EXPECT_EQ(biased_resist_bound(reference(), 0.2, 0.0, 5).n_prime, 77);
    EXPECT_NEAR(biased_resist_bound(reference(), 0.2, 0.1, 5).n_prime, 93, 1);
    EXPECT_NEAR(biased_resist_bound(reference(), 0.2, 0.2, 5).n_prime, 182, 1);
    EXPECT_EQ(biased_resist_bound(reference(), 0.2, 0.0, 5).raw, majority_honest_bound(reference(), 0.2).raw);
    EXPECT_EQ(code_of([] { biased_resist_bound(reference(), 0.2, 0.41, 5); }), ErrorCode::AboveThreshold);
    EXPECT_EQ(code_of([] { biased_resist_bound(reference(), 0.2, 0.1, 2); }), ErrorCode::SameAsTruth);
}

TEST(SolveEpsilon, QuadraticOracle)
{
    const double eps = solve_epsilon(0.5, 5, kGamma);
    EXPECT_NEAR(eps, oracle::positive_root(5.0, std::sqrt(5.0 * kGamma), 0.5), 1e-14);
    EXPECT_NEAR(eps, 0.127194421956428139, 1e-12);

    const double er = error_for_epsilon(0.1, 5, 2.0);
    EXPECT_NEAR(solve_epsilon(er, 5, 2.0), 0.1, 1e-12);
    EXPECT_EQ(code_of([] { solve_epsilon(0.0, 5, 2.0); }), ErrorCode::InvalidInputs);
    EXPECT_EQ(code_of([] { solve_epsilon(0.5, 5, 6.0); }), ErrorCode::InvalidInputs);
    EXPECT_EQ(code_of([] { solve_epsilon(0.5, 1, 1.0); }), ErrorCode::InvalidInputs);
}

TEST(SolveEpsilon, RoundTripProperty)
{
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const int m = 2 + static_cast<int>(gen() % 11);
        const double gamma = 1.0 + u(gen) * (m - 1);
        const double er = 1e-3 + 5.0 * u(gen);
        const double eps = solve_epsilon(er, m, gamma);
        EXPECT_GT(eps, 0.0);
        EXPECT_NEAR(error_for_epsilon(eps, m, gamma), er, 1e-9);
    }
}

TEST(AverageHonest, ReferenceValues)
{
    auto n_for = [](double er) { return average_bound_for_error(er, 5, kGamma, 0.2).n_prime; };
    EXPECT_NEAR(n_for(0.75), 366, 1);
    EXPECT_NEAR(static_cast<double>(n_for(0.5)), 716.0, 0.02 * 716);
    EXPECT_NEAR(static_cast<double>(n_for(1.0)), 221.0, 0.05 * 221);
}

TEST(AverageHonest, LogCancellationAndErrors)
{
    const double delta = 4.0 / std::exp(3.0);
    EXPECT_NEAR(average_honest_bound(1.0, 2, delta).raw, 9.0, 1e-12);
    EXPECT_EQ(code_of([] { average_honest_bound(0.0, 5, 0.2); }), ErrorCode::InvalidEpsilon);
    const auto b = average_honest_bound(0.1, 5, 0.2, kGamma);
    ASSERT_TRUE(b.inputs.target_error.has_value());
    EXPECT_NEAR(*b.inputs.target_error, 0.379501788419165597, 1e-12);
}

TEST(AverageRandomInterval, DirectEvaluation)
{
    const auto iv = average_random_interval(reference(), 0.1, 0.2, 0.2);
    EXPECT_NEAR(iv.upper, 0.450164794545028648, 1e-12);
    EXPECT_NEAR(iv.raw_lower, -0.318736223116457220, 1e-12);
    EXPECT_EQ(iv.lower, 0.0);
    EXPECT_DOUBLE_EQ(iv.confidence, 0.8);

    const auto honest = average_random_interval(reference(), 0.1, 0.0, 0.2);
    EXPECT_EQ(honest.lower, 0.0);
    EXPECT_NEAR(honest.upper, error_for_epsilon(0.1, 5, kGamma), 1e-12);
    EXPECT_THROW(average_random_interval(reference(), 0.1, 1.0, 0.2), Error);
}

TEST(AverageRandomInterval, SymmetricAtHalfScale)
{
    // gamma = m/2 = 2 for m = 4: the bias term vanishes.
    const DirichletParams p({0.3, 0.5, 0.1, 0.1});
    EXPECT_NEAR(mean_level(p.alpha()), 2.0, 1e-12);
    const auto iv = average_random_interval(p, 0.05, 0.3, 0.2);
    EXPECT_NEAR(iv.upper, -iv.raw_lower, 1e-12);
}

TEST(AverageBiasedInterval, DirectEvaluation)
{
    const auto iv = average_biased_interval(reference(), 0.1, 0.2, 5, 0.2);
    EXPECT_NEAR(iv.upper, 0.985656366123020586, 1e-12);
    EXPECT_NEAR(iv.lower, 0.145772205305550843, 1e-12);

    const auto honest = average_biased_interval(reference(), 0.1, 0.0, 5, 0.2);
    EXPECT_EQ(honest.lower, 0.0);
    EXPECT_NEAR(honest.upper, error_for_epsilon(0.1, 5, kGamma), 1e-12);

    // Integral gamma = 3 with target 3: no bias term.
    const DirichletParams p({0.25, 0.125, 0.25, 0.125, 0.25});
    const auto zero_bias = average_biased_interval(p, 0.1, 0.4, 3, 0.2);
    EXPECT_NEAR(zero_bias.upper, -zero_bias.raw_lower, 1e-12);
}

TEST(BoundProperties, MonotoneInDeltaAndFraction)
{
    std::mt19937_64 gen(21);
    std::gamma_distribution<double> g(1.0);
    const double deltas[] = {0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.9};
    for (int i = 0; i < 200; ++i) {
        const int m = 2 + static_cast<int>(gen() % 8);
        std::vector<double> a(static_cast<std::size_t>(m));
        double s = 0.0;
        for (double& x : a) {
            x = g(gen) + 1e-3;
            s += x;
        }
        for (double& x : a) {
            x /= s;
        }
        const DirichletParams p(a);
        std::int64_t prev_honest = INT64_MAX;
        std::int64_t prev_avg = INT64_MAX;
        for (double d : deltas) {
            const auto h = majority_honest_bound(p, d).n_prime;
            EXPECT_LE(h, prev_honest);
            prev_honest = h;
            const auto av = average_honest_bound(0.1, m, d).n_prime;
            EXPECT_LE(av, prev_avg);
            prev_avg = av;
        }
        double prev = 0.0;
        for (double f = 0.0; f < 0.95; f += 0.05) {
            const double r = majority_random_bound(p, 0.2, f).raw;
            EXPECT_GE(r, prev);
            prev = r;
        }
        const int label = ground_truth(p).label;
        for (int t = 1; t <= m; ++t) {
            const double th = biased_win_threshold(p, t);
            EXPECT_GE(th, 0.0);
            EXPECT_LT(th, 1.0);
            EXPECT_EQ(th == 0.0, t == label);
        }
    }
}

TEST(BoundProperties, ThresholdDecreasesInTargetMass)
{
    // Move mass from level 5 into level 1 while keeping level 2 the majority.
    double prev = 1.0;
    for (double x = 0.01; x < 0.3; x += 0.02) {
        const DirichletParams p({x, 0.5, 0.1, 0.1, 0.3 - x});
        const double th = biased_win_threshold(p, 1);
        EXPECT_LT(th, prev);
        prev = th;
    }
}

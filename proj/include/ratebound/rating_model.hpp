#pragma once

// Rating model: an m-level scale, the collective behaviour vector alpha of
// an item's user population, observed rating counts, and misbehaviour
// profiles. P[observed rating = k] = alpha_k, so the infinite-sample
// majority label is argmax alpha and the infinite-sample mean is sum k*alpha_k.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ratebound/error.hpp"

namespace ratebound {

/// Levels closer than this are treated as a tied maximum.
inline constexpr double kMinMajorityGap = 1e-9;
/// Inputs this close to the simplex are renormalised; anything further is rejected.
inline constexpr double kSimplexTolerance = 1e-6;
/// Additive floor applied when promoting inferred (possibly zero) estimates.
inline constexpr double kSmoothingFloor = 1e-12;

class RatingScale {
public:
    explicit RatingScale(int levels) : m_(levels)
    {
        if (levels < 2) {
            fail(ErrorCode::InvalidParams, "rating scale needs at least 2 levels, got " + std::to_string(levels));
        }
    }

    int levels() const noexcept { return m_; }
    bool contains(int level) const noexcept { return level >= 1 && level <= m_; }

    friend bool operator==(const RatingScale&, const RatingScale&) = default;

private:
    int m_;
};

/// Point on the open simplex: every component strictly positive, sum 1.
class DirichletParams {
public:
    explicit DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha))
    {
        if (alpha_.size() < 2) {
            fail(ErrorCode::InvalidParams, "alpha needs at least 2 components");
        }
        double sum = 0.0;
        for (double a : alpha_) {
            if (!std::isfinite(a) || !(a > 0.0)) {
                fail(ErrorCode::InvalidParams, "alpha components must be finite and > 0");
            }
            sum += a;
        }
        if (std::abs(sum - 1.0) > kSimplexTolerance) {
            fail(ErrorCode::InvalidParams, "alpha must sum to 1 (got " + std::to_string(sum) + ")");
        }
        for (double& a : alpha_) {
            a /= sum;
        }
    }

    /// Builds params from maximum-likelihood estimates that may contain zeros.
    static DirichletParams from_inferred(std::span<const double> estimate)
    {
        std::vector<double> alpha(estimate.begin(), estimate.end());
        double sum = 0.0;
        for (double& a : alpha) {
            if (!std::isfinite(a) || a < 0.0) {
                fail(ErrorCode::InvalidParams, "inferred alpha components must be finite and >= 0");
            }
            a += kSmoothingFloor;
            sum += a;
        }
        if (!(sum > 0.0)) {
            fail(ErrorCode::InvalidParams, "inferred alpha is empty");
        }
        for (double& a : alpha) {
            a /= sum;
        }
        return DirichletParams(std::move(alpha));
    }

    int levels() const noexcept { return static_cast<int>(alpha_.size()); }
    RatingScale scale() const { return RatingScale(levels()); }
    std::span<const double> alpha() const noexcept { return alpha_; }
    /// 1-based level access.
    double at(int level) const { return alpha_.at(static_cast<std::size_t>(level - 1)); }

private:
    std::vector<double> alpha_;
};

/// Observed rating counts n_1..n_m; missing ratings are never stored.
class RatingMultiset {
public:
    explicit RatingMultiset(RatingScale scale) : counts_(static_cast<std::size_t>(scale.levels()), 0) {}

    explicit RatingMultiset(std::vector<std::uint64_t> counts) : counts_(std::move(counts))
    {
        RatingScale check(static_cast<int>(counts_.size()));
        (void)check;
        n_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
    }

    static RatingMultiset from_ratings(RatingScale scale, std::span<const int> ratings)
    {
        RatingMultiset set(scale);
        for (int r : ratings) {
            set.add(r);
        }
        return set;
    }

    void add(int level, std::uint64_t times = 1)
    {
        if (level < 1 || level > levels()) {
            fail(ErrorCode::OutOfScaleRating,
                 "rating " + std::to_string(level) + " outside 1.." + std::to_string(levels()));
        }
        counts_[static_cast<std::size_t>(level - 1)] += times;
        n_ += times;
    }

    int levels() const noexcept { return static_cast<int>(counts_.size()); }
    std::uint64_t total() const noexcept { return n_; }
    std::span<const std::uint64_t> counts() const noexcept { return counts_; }
    std::uint64_t count(int level) const { return counts_.at(static_cast<std::size_t>(level - 1)); }

    friend bool operator==(const RatingMultiset&, const RatingMultiset&) = default;

private:
    std::vector<std::uint64_t> counts_;
    std::uint64_t n_ = 0;
};

enum class MisbehaviorKind { Honest, Random, Biased };

/// Who besides honest raters contributes ratings: nobody, uniform-random
/// raters (fraction f < 1), or raters always giving one target level.
class MisbehaviorProfile {
public:
    static MisbehaviorProfile honest() { return MisbehaviorProfile(MisbehaviorKind::Honest, 0.0, 0); }

    static MisbehaviorProfile random(double fraction)
    {
        if (!(fraction >= 0.0 && fraction < 1.0)) {
            fail(ErrorCode::InvalidFraction, "random misbehaviour fraction must lie in [0,1)");
        }
        return MisbehaviorProfile(MisbehaviorKind::Random, fraction, 0);
    }

    static MisbehaviorProfile biased(double fraction, int target)
    {
        if (!(fraction >= 0.0 && fraction <= 1.0)) {
            fail(ErrorCode::InvalidFraction, "biased misbehaviour fraction must lie in [0,1]");
        }
        if (target < 1) {
            fail(ErrorCode::InvalidInputs, "biased target level must be >= 1");
        }
        return MisbehaviorProfile(MisbehaviorKind::Biased, fraction, target);
    }

    MisbehaviorKind kind() const noexcept { return kind_; }
    double fraction() const noexcept { return fraction_; }
    /// 0 unless kind() == Biased.
    int target() const noexcept { return target_; }

    void check_scale(const RatingScale& scale) const
    {
        if (kind_ == MisbehaviorKind::Biased && !scale.contains(target_)) {
            fail(ErrorCode::InvalidInputs, "biased target " + std::to_string(target_) + " outside the rating scale");
        }
    }

    friend bool operator==(const MisbehaviorProfile&, const MisbehaviorProfile&) = default;

private:
    MisbehaviorProfile(MisbehaviorKind kind, double fraction, int target)
        : kind_(kind), fraction_(fraction), target_(target)
    {
    }

    MisbehaviorKind kind_;
    double fraction_;
    int target_;
};

inline std::string to_string(MisbehaviorKind kind)
{
    switch (kind) {
    case MisbehaviorKind::Honest: return "honest";
    case MisbehaviorKind::Random: return "random";
    case MisbehaviorKind::Biased: return "biased";
    }
    return "unknown";
}

struct GroundTruth {
    int label = 0;          // majority-rule truth, 1-based
    double mean = 0.0;      // average-rule truth
    double runner_up = 0.0; // largest alpha excluding one copy of the maximum
};

/// Marginal pmf of one observed rating; identical to alpha.
inline std::vector<double> marginal_pmf(const DirichletParams& params)
{
    return {params.alpha().begin(), params.alpha().end()};
}

/// Top level and second-largest value of a probability vector, counting
/// multiplicity. Throws DegenerateMajority when the two are within
/// kMinMajorityGap.
struct TopTwo {
    int label = 0;
    double top = 0.0;
    double runner_up = 0.0;
};

inline TopTwo top_two(std::span<const double> p)
{
    if (p.size() < 2) {
        fail(ErrorCode::InvalidParams, "need at least 2 levels");
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.size(); ++k) {
        if (p[k] > p[best]) {
            best = k;
        }
    }
    double second = -1.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (k != best) {
            second = std::max(second, p[k]);
        }
    }
    if (p[best] - second < kMinMajorityGap) {
        fail(ErrorCode::DegenerateMajority, "maximum alpha attained at two or more levels");
    }
    return {static_cast<int>(best) + 1, p[best], second};
}

inline double mean_level(std::span<const double> p)
{
    double mean = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        mean += static_cast<double>(k + 1) * p[k];
    }
    return mean;
}

inline GroundTruth ground_truth(const DirichletParams& params)
{
    const TopTwo top = top_two(params.alpha());
    const double mean = std::clamp(mean_level(params.alpha()), 1.0, static_cast<double>(params.levels()));
    return {top.label, mean, top.runner_up};
}

} // namespace ratebound

#pragma once

// Minimum-number-of-ratings bounds for the majority and average scoring
// rules, the biased-misbehaviour win threshold, and average-rule error
// intervals under random and biased misbehaviour. Logarithms are natural.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ratebound/aggregation.hpp"
#include "ratebound/error.hpp"
#include "ratebound/rating_model.hpp"

namespace ratebound {

/// What a bound was computed from, echoed back for reports.
struct BoundInputs {
    Rule rule = Rule::Majority;
    std::vector<double> alpha;
    int levels = 0;
    double delta = 0.0;
    MisbehaviorProfile profile = MisbehaviorProfile::honest();
    std::optional<double> target_error;
    std::optional<double> epsilon;
};

struct BoundResult {
    double raw = 0.0;
    std::int64_t n_prime = 0;
    BoundInputs inputs;
};

struct ErrorInterval {
    double lower = 0.0;
    double upper = 0.0;
    double confidence = 0.0;
    /// Lower bound before clamping at zero; may be negative (vacuous).
    double raw_lower = 0.0;
    /// Ratings needed for the interval to hold at the stated confidence.
    double min_ratings = 0.0;
};

/// Round half up.
inline std::int64_t integerize(double raw)
{
    return static_cast<std::int64_t>(std::floor(raw + 0.5));
}

namespace detail {

inline void check_delta(double delta)
{
    if (!(delta > 0.0 && delta < 1.0)) {
        fail(ErrorCode::InvalidDelta, "delta must lie in (0,1), got " + std::to_string(delta));
    }
}

inline void check_epsilon(double epsilon)
{
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        fail(ErrorCode::InvalidEpsilon, "epsilon must be a positive finite number");
    }
}

inline void check_target(const DirichletParams& params, int target)
{
    if (!params.scale().contains(target)) {
        fail(ErrorCode::InvalidInputs, "target level " + std::to_string(target) + " outside 1.." +
                                           std::to_string(params.levels()));
    }
}

inline BoundResult make_result(double raw, Rule rule, const DirichletParams* params, int levels, double delta,
                               MisbehaviorProfile profile)
{
    BoundResult result;
    result.raw = raw;
    result.n_prime = integerize(raw);
    result.inputs.rule = rule;
    if (params != nullptr) {
        result.inputs.alpha.assign(params->alpha().begin(), params->alpha().end());
    }
    result.inputs.levels = levels;
    result.inputs.delta = delta;
    result.inputs.profile = profile;
    return result;
}

inline double majority_log_term(int levels, double delta)
{
    return std::log(static_cast<double>(levels) / delta);
}

} // namespace detail

/// Honest raters, majority rule: 12 a_l / (a_l - a~)^2 * ln(m/delta).
inline BoundResult majority_honest_bound(const DirichletParams& params, double delta)
{
    detail::check_delta(delta);
    const GroundTruth truth = ground_truth(params);
    const double top = params.at(truth.label);
    const double gap = top - truth.runner_up;
    const double raw = 12.0 * top / (gap * gap) * detail::majority_log_term(params.levels(), delta);
    return detail::make_result(raw, Rule::Majority, &params, params.levels(), delta, MisbehaviorProfile::honest());
}

/// A fraction f of raters pick a level uniformly at random.
inline BoundResult majority_random_bound(const DirichletParams& params, double delta, double fraction)
{
    detail::check_delta(delta);
    const MisbehaviorProfile profile = MisbehaviorProfile::random(fraction);
    const GroundTruth truth = ground_truth(params);
    const double m = params.levels();
    const double top = params.at(truth.label);
    const double gap = top - truth.runner_up;
    const double honest = 1.0 - fraction;
    const double raw = 12.0 * (fraction / m + honest * top) / (honest * honest * gap * gap) *
                       detail::majority_log_term(params.levels(), delta);
    return detail::make_result(raw, Rule::Majority, &params, params.levels(), delta, profile);
}

/// Smallest biased fraction that takes the majority away from the true
/// label: (a_l - a_t) / (1 + a_l - a_t). Zero when the target is the truth.
inline double biased_win_threshold(const DirichletParams& params, int target)
{
    detail::check_target(params, target);
    const GroundTruth truth = ground_truth(params);
    const double diff = params.at(truth.label) - params.at(target);
    return diff / (1.0 + diff);
}

/// Ratings after which biased raters (fraction f') make the majority label
/// equal to their target with probability at least 1 - delta.
inline BoundResult biased_win_bound(const DirichletParams& params, double delta, double fraction, int target)
{
    detail::check_delta(delta);
    detail::check_target(params, target);
    const MisbehaviorProfile profile = MisbehaviorProfile::biased(fraction, target);
    const GroundTruth truth = ground_truth(params);
    const double top = params.at(truth.label);
    const double honest = 1.0 - fraction;
    const double log_term = detail::majority_log_term(params.levels(), delta);

    double raw = 0.0;
    if (target != truth.label) {
        const double threshold = biased_win_threshold(params, target);
        if (!(fraction > threshold)) {
            fail(ErrorCode::BelowThreshold, "biased fraction " + std::to_string(fraction) +
                                                " does not exceed the win threshold " + std::to_string(threshold));
        }
        const double at_target = params.at(target);
        const double margin = fraction + honest * (at_target - top);
        raw = 12.0 * (fraction + honest * at_target) / (margin * margin) * log_term;
    } else {
        const double margin = fraction + honest * (top - truth.runner_up);
        raw = 12.0 * (fraction + honest * top) / (margin * margin) * log_term;
    }
    return detail::make_result(raw, Rule::Majority, &params, params.levels(), delta, profile);
}

/// Ratings needed to still extract the true label while a fraction f' below
/// the win threshold pushes a different target level.
inline BoundResult biased_resist_bound(const DirichletParams& params, double delta, double fraction, int target)
{
    detail::check_delta(delta);
    detail::check_target(params, target);
    const MisbehaviorProfile profile = MisbehaviorProfile::biased(fraction, target);
    const GroundTruth truth = ground_truth(params);
    if (target == truth.label) {
        fail(ErrorCode::SameAsTruth, "biased target equals the true label; use biased_win_bound");
    }
    const double threshold = biased_win_threshold(params, target);
    if (fraction >= threshold) {
        fail(ErrorCode::AboveThreshold, "biased fraction " + std::to_string(fraction) +
                                            " reaches the threshold " + std::to_string(threshold) +
                                            "; the true label cannot be extracted");
    }
    const double top = params.at(truth.label);
    const double honest = 1.0 - fraction;
    const double rival = std::max(fraction + honest * params.at(target), honest * truth.runner_up);
    const double margin = honest * top - rival;
    if (!(margin > 0.0)) {
        fail(ErrorCode::AboveThreshold, "no margin left between truth and the biased target");
    }
    const double raw = 12.0 * honest * top * detail::majority_log_term(params.levels(), delta) / (margin * margin);
    return detail::make_result(raw, Rule::Majority, &params, params.levels(), delta, profile);
}

/// The guaranteed absolute error for a given epsilon: eps*sqrt(m*gamma) + m*eps^2.
inline double error_for_epsilon(double epsilon, int levels, double gamma)
{
    const double m = levels;
    return epsilon * std::sqrt(m * gamma) + m * epsilon * epsilon;
}

/// Positive root of m*eps^2 + sqrt(m*gamma)*eps - E_r = 0.
inline double solve_epsilon(double target_error, int levels, double gamma)
{
    if (levels < 2) {
        fail(ErrorCode::InvalidInputs, "rating scale needs at least 2 levels");
    }
    if (!(target_error > 0.0) || !std::isfinite(target_error)) {
        fail(ErrorCode::InvalidInputs, "target error must be positive");
    }
    if (!(gamma >= 1.0 && gamma <= static_cast<double>(levels))) {
        fail(ErrorCode::InvalidInputs, "gamma must lie in [1, m]");
    }
    const double m = levels;
    const double b = std::sqrt(m * gamma);
    // (-b + sqrt(b^2 + 4 m E)) / (2m), rationalised to avoid cancellation.
    return 2.0 * target_error / (b + std::sqrt(b * b + 4.0 * m * target_error));
}

/// Honest raters, average rule: 3/eps^2 * ln(2m/delta). When gamma is given
/// the implied error eps*sqrt(m*gamma) + m*eps^2 is echoed as target_error.
inline BoundResult average_honest_bound(double epsilon, int levels, double delta,
                                        std::optional<double> gamma = std::nullopt)
{
    detail::check_epsilon(epsilon);
    detail::check_delta(delta);
    RatingScale scale(levels);
    const double raw = 3.0 / (epsilon * epsilon) * std::log(2.0 * scale.levels() / delta);
    BoundResult result =
        detail::make_result(raw, Rule::AverageScore, nullptr, levels, delta, MisbehaviorProfile::honest());
    result.inputs.epsilon = epsilon;
    if (gamma) {
        result.inputs.target_error = error_for_epsilon(epsilon, levels, *gamma);
    }
    return result;
}

/// Average-rule bound sized for a target absolute error E_r.
inline BoundResult average_bound_for_error(double target_error, int levels, double gamma, double delta)
{
    const double epsilon = solve_epsilon(target_error, levels, gamma);
    BoundResult result = average_honest_bound(epsilon, levels, delta);
    result.inputs.target_error = target_error;
    return result;
}

inline double average_min_ratings(double epsilon, int levels, double delta)
{
    return 3.0 * std::log(2.0 * levels / delta) / (epsilon * epsilon);
}

namespace detail {

inline ErrorInterval make_interval(double bias, double width, double confidence, double min_ratings)
{
    ErrorInterval interval;
    interval.raw_lower = bias - width;
    interval.lower = std::max(0.0, interval.raw_lower);
    interval.upper = bias + width;
    interval.confidence = confidence;
    interval.min_ratings = min_ratings;
    return interval;
}

} // namespace detail

/// Honest raters: [0, eps sqrt(m gamma) + m eps^2].
inline ErrorInterval average_honest_interval(const DirichletParams& params, double epsilon, double delta)
{
    detail::check_epsilon(epsilon);
    detail::check_delta(delta);
    const double width = error_for_epsilon(epsilon, params.levels(), mean_level(params.alpha()));
    return detail::make_interval(0.0, width, 1.0 - delta, average_min_ratings(epsilon, params.levels(), delta));
}

/// |r^ - gamma| range under random misbehaviour fraction f:
/// |m/2 - gamma| f -/+ (eps sqrt(m(gamma + m f/2 - gamma f)) + m eps^2).
inline ErrorInterval average_random_interval(const DirichletParams& params, double epsilon, double fraction,
                                             double delta)
{
    detail::check_epsilon(epsilon);
    detail::check_delta(delta);
    (void)MisbehaviorProfile::random(fraction);
    const double m = params.levels();
    const double gamma = mean_level(params.alpha());
    const double bias = std::abs(m / 2.0 - gamma) * fraction;
    const double width = epsilon * std::sqrt(m * (gamma + m * fraction / 2.0 - gamma * fraction)) + m * epsilon * epsilon;
    return detail::make_interval(bias, width, 1.0 - delta, average_min_ratings(epsilon, params.levels(), delta));
}

/// |r^ - gamma| range when a fraction f' always rates the target level l':
/// |l' - gamma| f' -/+ (eps sqrt(m(gamma + f' l' - gamma f')) + m eps^2).
inline ErrorInterval average_biased_interval(const DirichletParams& params, double epsilon, double fraction,
                                             int target, double delta)
{
    detail::check_epsilon(epsilon);
    detail::check_delta(delta);
    detail::check_target(params, target);
    (void)MisbehaviorProfile::biased(fraction, target);
    const double m = params.levels();
    const double gamma = mean_level(params.alpha());
    const double level = target;
    const double bias = std::abs(level - gamma) * fraction;
    const double width = epsilon * std::sqrt(m * (gamma + fraction * level - gamma * fraction)) + m * epsilon * epsilon;
    return detail::make_interval(bias, width, 1.0 - delta, average_min_ratings(epsilon, params.levels(), delta));
}

} // namespace ratebound

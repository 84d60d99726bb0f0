#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ratebound/aggregation.hpp"
#include "ratebound/bounds.hpp"
#include "ratebound/error.hpp"
#include "ratebound/rating_model.hpp"

namespace ratebound {

/// Maximum-likelihood alpha: empirical level frequencies. May contain zeros.
struct InferredParams {
    std::vector<double> alpha_hat;
    std::vector<std::uint64_t> counts;
    std::uint64_t n = 0;

    int levels() const noexcept { return static_cast<int>(alpha_hat.size()); }
    DirichletParams to_params() const { return DirichletParams::from_inferred(alpha_hat); }
};

inline InferredParams infer_alpha(const RatingMultiset& ratings)
{
    if (ratings.total() == 0) {
        fail(ErrorCode::EmptyInput, "cannot infer alpha from zero ratings");
    }
    InferredParams out;
    out.counts.assign(ratings.counts().begin(), ratings.counts().end());
    out.n = ratings.total();
    out.alpha_hat.reserve(out.counts.size());
    const double n = static_cast<double>(out.n);
    for (std::uint64_t c : out.counts) {
        out.alpha_hat.push_back(static_cast<double>(c) / n);
    }
    return out;
}

/// Minimum ratings inferred from a rating history: estimate alpha, then plug
/// the estimate into the honest bound of the chosen rule. target_error is
/// required for the average rule and ignored for the majority rule.
inline BoundResult infer_min_ratings(const RatingMultiset& history, Rule rule, double delta,
                                     std::optional<double> target_error = std::nullopt)
{
    detail::check_delta(delta);
    const InferredParams inferred = infer_alpha(history);
    const int m = inferred.levels();

    BoundResult result;
    if (rule == Rule::Majority) {
        const TopTwo top = top_two(inferred.alpha_hat);
        const double gap = top.top - top.runner_up;
        const double raw = 12.0 * top.top / (gap * gap) * std::log(static_cast<double>(m) / delta);
        result.raw = raw;
        result.n_prime = integerize(raw);
    } else {
        if (!target_error) {
            fail(ErrorCode::InvalidInputs, "average rule needs a target error E_r");
        }
        const double gamma = mean_level(inferred.alpha_hat);
        const double epsilon = solve_epsilon(*target_error, m, gamma);
        result.raw = average_min_ratings(epsilon, m, delta);
        result.n_prime = integerize(result.raw);
        result.inputs.epsilon = epsilon;
        result.inputs.target_error = target_error;
    }
    result.inputs.rule = rule;
    result.inputs.alpha = inferred.alpha_hat;
    result.inputs.levels = m;
    result.inputs.delta = delta;
    return result;
}

inline BoundResult infer_min_ratings(RatingScale scale, std::span<const int> history, Rule rule, double delta,
                                     std::optional<double> target_error = std::nullopt)
{
    return infer_min_ratings(RatingMultiset::from_ratings(scale, history), rule, delta, target_error);
}

} // namespace ratebound

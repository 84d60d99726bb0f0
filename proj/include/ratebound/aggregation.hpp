#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ratebound/error.hpp"
#include "ratebound/rating_model.hpp"

namespace ratebound {

enum class Rule { Majority, AverageScore };

inline std::string_view to_string(Rule rule)
{
    return rule == Rule::Majority ? "majority" : "average";
}

inline Rule parse_rule(std::string_view text)
{
    if (text == "majority") {
        return Rule::Majority;
    }
    if (text == "average" || text == "average-score") {
        return Rule::AverageScore;
    }
    fail(ErrorCode::InvalidInputs, "unknown rule '" + std::string(text) + "' (expected majority|average)");
}

struct AggregateResult {
    Rule rule = Rule::Majority;
    std::optional<int> label;
    std::optional<double> score;
    std::uint64_t n = 0;
    /// Majority only: more than one level attained the maximum count.
    bool tie = false;
};

/// Mode of the counts; ties go to the lowest level.
inline AggregateResult majority_label(const RatingMultiset& ratings)
{
    if (ratings.total() == 0) {
        fail(ErrorCode::EmptyInput, "majority rule needs at least one rating");
    }
    const auto counts = ratings.counts();
    std::size_t best = 0;
    bool tie = false;
    for (std::size_t k = 1; k < counts.size(); ++k) {
        if (counts[k] > counts[best]) {
            best = k;
            tie = false;
        } else if (counts[k] == counts[best]) {
            tie = true;
        }
    }
    AggregateResult result;
    result.rule = Rule::Majority;
    result.label = static_cast<int>(best) + 1;
    result.n = ratings.total();
    result.tie = tie;
    return result;
}

inline AggregateResult average_score(const RatingMultiset& ratings)
{
    if (ratings.total() == 0) {
        fail(ErrorCode::EmptyInput, "average scoring rule needs at least one rating");
    }
    const auto counts = ratings.counts();
    // Integer sum keeps the score exact until the final division.
    std::uint64_t weighted = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        weighted += static_cast<std::uint64_t>(k + 1) * counts[k];
    }
    AggregateResult result;
    result.rule = Rule::AverageScore;
    result.score = static_cast<double>(weighted) / static_cast<double>(ratings.total());
    result.n = ratings.total();
    return result;
}

inline AggregateResult aggregate(Rule rule, const RatingMultiset& ratings)
{
    return rule == Rule::Majority ? majority_label(ratings) : average_score(ratings);
}

} // namespace ratebound

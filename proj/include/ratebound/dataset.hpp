#pragma once

// Time-stamped rating logs: ingestion (CSV or JSON lines), the prefix-based
// validation procedures, the distribution of per-item minimum ratings, and
// a synthetic generator that writes the same schema plus a ground-truth
// sidecar.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ratebound/aggregation.hpp"
#include "ratebound/bounds.hpp"
#include "ratebound/error.hpp"
#include "ratebound/inference.hpp"
#include "ratebound/rating_model.hpp"
#include "ratebound/rng.hpp"
#include "ratebound/simulation.hpp"

namespace ratebound {

struct RatingEvent {
    std::string item_id;
    std::string user_id;
    int rating = 0;
    std::int64_t timestamp = 0;

    friend bool operator==(const RatingEvent&, const RatingEvent&) = default;
};

/// One item's ratings sorted by (timestamp, input order).
struct ItemHistory {
    std::string item_id;
    std::vector<RatingEvent> events;

    std::size_t size() const noexcept { return events.size(); }

    RatingMultiset counts(RatingScale scale, std::size_t prefix) const
    {
        RatingMultiset set(scale);
        for (std::size_t j = 0; j < prefix && j < events.size(); ++j) {
            set.add(events[j].rating);
        }
        return set;
    }

    RatingMultiset counts(RatingScale scale) const { return counts(scale, events.size()); }

    friend bool operator==(const ItemHistory&, const ItemHistory&) = default;
};

/// Items ordered by item_id.
struct Dataset {
    RatingScale scale{5};
    std::vector<ItemHistory> items;

    std::size_t rating_count() const
    {
        std::size_t total = 0;
        for (const auto& item : items) {
            total += item.size();
        }
        return total;
    }
};

enum class InputFormat { Auto, Csv, JsonLines };

namespace detail {

inline std::string line_error(std::size_t line, const std::string& what)
{
    return "line " + std::to_string(line) + ": " + what;
}

/// Splits one CSV record; double quotes may wrap fields and "" escapes a quote.
inline std::vector<std::string> split_csv(std::string_view line, std::size_t line_no)
{
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (quoted) {
        fail(ErrorCode::ParseError, line_error(line_no, "unterminated quoted field"));
    }
    fields.push_back(std::move(field));
    return fields;
}

template <class Int>
Int parse_integer(std::string_view text, std::size_t line_no, std::string_view column)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
        text.remove_suffix(1);
    }
    Int value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        fail(ErrorCode::ParseError,
             line_error(line_no, "column '" + std::string(column) + "' is not an integer: '" + std::string(text) + "'"));
    }
    return value;
}

inline void check_event(const RatingEvent& ev, RatingScale scale, std::size_t line_no)
{
    if (ev.item_id.empty()) {
        fail(ErrorCode::ParseError, line_error(line_no, "empty item_id"));
    }
    if (!scale.contains(ev.rating)) {
        fail(ErrorCode::OutOfScaleRating, line_error(line_no, "rating " + std::to_string(ev.rating) +
                                                                  " outside 1.." + std::to_string(scale.levels())));
    }
    if (ev.timestamp < 0) {
        fail(ErrorCode::ParseError, line_error(line_no, "negative timestamp"));
    }
}

inline std::string json_id(const nlohmann::json& value, std::size_t line_no, std::string_view field)
{
    if (value.is_string()) {
        return value.get<std::string>();
    }
    if (value.is_number_integer()) {
        return value.dump();
    }
    fail(ErrorCode::ParseError, line_error(line_no, "field '" + std::string(field) + "' must be a string"));
}

inline std::int64_t json_int(const nlohmann::json& obj, std::size_t line_no, const char* field)
{
    const auto it = obj.find(field);
    if (it == obj.end()) {
        fail(ErrorCode::ParseError, line_error(line_no, std::string("missing field '") + field + "'"));
    }
    if (!it->is_number_integer()) {
        fail(ErrorCode::ParseError, line_error(line_no, std::string("field '") + field + "' must be an integer"));
    }
    return it->get<std::int64_t>();
}

inline Dataset group_events(std::vector<RatingEvent> events, RatingScale scale)
{
    std::map<std::string, ItemHistory> by_item;
    for (auto& ev : events) {
        auto& item = by_item[ev.item_id];
        item.item_id = ev.item_id;
        item.events.push_back(std::move(ev));
    }
    Dataset data;
    data.scale = scale;
    data.items.reserve(by_item.size());
    for (auto& [id, item] : by_item) {
        std::stable_sort(item.events.begin(), item.events.end(),
                         [](const RatingEvent& a, const RatingEvent& b) { return a.timestamp < b.timestamp; });
        data.items.push_back(std::move(item));
    }
    return data;
}

} // namespace detail

/// Reads a rating log in one streaming pass. Auto detects JSON lines by a
/// leading '{' on the first non-blank line.
inline Dataset ingest(std::istream& in, RatingScale scale, InputFormat format = InputFormat::Auto)
{
    std::vector<RatingEvent> events;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    int col_item = -1;
    int col_user = -1;
    int col_rating = -1;
    int col_time = -1;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
            line.erase(0, 3);
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        if (format == InputFormat::Auto) {
            format = line[line.find_first_not_of(" \t")] == '{' ? InputFormat::JsonLines : InputFormat::Csv;
        }

        RatingEvent ev;
        if (format == InputFormat::JsonLines) {
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                fail(ErrorCode::ParseError, detail::line_error(line_no, e.what()));
            }
            if (!obj.is_object()) {
                fail(ErrorCode::ParseError, detail::line_error(line_no, "expected a JSON object"));
            }
            if (!obj.contains("item_id") || !obj.contains("user_id")) {
                fail(ErrorCode::ParseError, detail::line_error(line_no, "missing item_id or user_id"));
            }
            ev.item_id = detail::json_id(obj["item_id"], line_no, "item_id");
            ev.user_id = detail::json_id(obj["user_id"], line_no, "user_id");
            const std::int64_t rating = detail::json_int(obj, line_no, "rating");
            if (rating < INT32_MIN || rating > INT32_MAX) {
                fail(ErrorCode::OutOfScaleRating, detail::line_error(line_no, "rating " + std::to_string(rating)));
            }
            ev.rating = static_cast<int>(rating);
            ev.timestamp = detail::json_int(obj, line_no, "timestamp");
        } else {
            auto fields = detail::split_csv(line, line_no);
            if (!have_header) {
                for (int c = 0; c < static_cast<int>(fields.size()); ++c) {
                    const std::string& name = fields[static_cast<std::size_t>(c)];
                    if (name == "item_id") col_item = c;
                    else if (name == "user_id") col_user = c;
                    else if (name == "rating") col_rating = c;
                    else if (name == "timestamp") col_time = c;
                }
                if (col_item < 0 || col_user < 0 || col_rating < 0 || col_time < 0) {
                    fail(ErrorCode::ParseError,
                         detail::line_error(line_no, "header must name item_id,user_id,rating,timestamp"));
                }
                have_header = true;
                continue;
            }
            const int needed = std::max({col_item, col_user, col_rating, col_time});
            if (static_cast<int>(fields.size()) <= needed) {
                fail(ErrorCode::ParseError, detail::line_error(line_no, "expected " + std::to_string(needed + 1) +
                                                                            " fields, got " +
                                                                            std::to_string(fields.size())));
            }
            ev.item_id = fields[static_cast<std::size_t>(col_item)];
            ev.user_id = fields[static_cast<std::size_t>(col_user)];
            ev.rating = detail::parse_integer<int>(fields[static_cast<std::size_t>(col_rating)], line_no, "rating");
            ev.timestamp =
                detail::parse_integer<std::int64_t>(fields[static_cast<std::size_t>(col_time)], line_no, "timestamp");
        }
        detail::check_event(ev, scale, line_no);
        events.push_back(std::move(ev));
    }
    return detail::group_events(std::move(events), scale);
}

inline void write_csv(const Dataset& data, std::ostream& out)
{
    auto field = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) {
            return s;
        }
        std::string quoted = "\"";
        for (char c : s) {
            if (c == '"') {
                quoted.push_back('"');
            }
            quoted.push_back(c);
        }
        quoted.push_back('"');
        return quoted;
    };
    out << "item_id,user_id,rating,timestamp\n";
    for (const auto& item : data.items) {
        for (const auto& ev : item.events) {
            out << field(ev.item_id) << ',' << field(ev.user_id) << ',' << ev.rating << ',' << ev.timestamp << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Validation

struct ItemValidation {
    std::string item_id;
    std::uint64_t n_ratings = 0;
    std::int64_t n_prime = 0;
    double true_quality = 0.0;
    std::uint64_t tests = 0;
    std::uint64_t reliable = 0;
    /// Online mode: prefixes whose inferred alpha had a tied maximum.
    std::uint64_t skipped_prefixes = 0;
};

struct SkippedItem {
    std::string item_id;
    std::string reason;
};

struct ValidationReport {
    Rule rule = Rule::Majority;
    bool online = false;
    double delta = 0.0;
    std::optional<double> target_error;
    std::uint64_t n_test = 0;
    std::uint64_t n_reliable = 0;
    double f_reliable = 0.0;
    std::vector<ItemValidation> per_item;
    std::vector<SkippedItem> skipped;
};

namespace detail {

struct ItemTruth {
    double quality = 0.0; // label for majority, gamma-hat for average
    int label = 0;
};

inline std::optional<ItemTruth> item_truth(const RatingMultiset& full, Rule rule)
{
    const InferredParams inferred = infer_alpha(full);
    if (rule == Rule::Majority) {
        try {
            const TopTwo top = top_two(inferred.alpha_hat);
            return ItemTruth{static_cast<double>(top.label), top.label};
        } catch (const Error& e) {
            if (e.code() == ErrorCode::DegenerateMajority) {
                return std::nullopt;
            }
            throw;
        }
    }
    return ItemTruth{mean_level(inferred.alpha_hat), 0};
}

inline bool reflects_truth(const RatingMultiset& prefix, Rule rule, const ItemTruth& truth, double target_error)
{
    if (rule == Rule::Majority) {
        return *majority_label(prefix).label == truth.label;
    }
    return std::abs(*average_score(prefix).score - truth.quality) <= target_error;
}

inline std::optional<std::int64_t> try_min_ratings(const RatingMultiset& counts, Rule rule, double delta,
                                                   std::optional<double> target_error)
{
    try {
        return infer_min_ratings(counts, rule, delta, target_error).n_prime;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DegenerateMajority) {
            return std::nullopt;
        }
        throw;
    }
}

struct ItemOutcome {
    std::optional<ItemValidation> result;
    std::string skip_reason;
};

inline ItemOutcome validate_item(const ItemHistory& item, RatingScale scale, Rule rule, double delta,
                                 std::optional<double> target_error, bool online)
{
    ItemOutcome outcome;
    if (item.events.empty()) {
        outcome.skip_reason = "EmptyInput";
        return outcome;
    }
    const RatingMultiset full = item.counts(scale);
    const auto truth = item_truth(full, rule);
    if (!truth) {
        outcome.skip_reason = "DegenerateMajority";
        return outcome;
    }
    ItemValidation v;
    v.item_id = item.item_id;
    v.n_ratings = full.total();
    v.true_quality = truth->quality;
    v.n_prime = infer_min_ratings(full, rule, delta, target_error).n_prime;
    const double er = target_error.value_or(0.0);

    RatingMultiset prefix(scale);
    for (std::size_t j = 1; j <= item.events.size(); ++j) {
        prefix.add(item.events[j - 1].rating);
        if (online) {
            const auto inferred = try_min_ratings(prefix, rule, delta, target_error);
            if (!inferred) {
                ++v.skipped_prefixes;
                continue;
            }
            if (static_cast<std::int64_t>(j) < *inferred) {
                continue;
            }
        } else if (static_cast<std::int64_t>(j) < v.n_prime) {
            continue;
        }
        ++v.tests;
        if (reflects_truth(prefix, rule, *truth, er)) {
            ++v.reliable;
        }
    }
    outcome.result = std::move(v);
    return outcome;
}

inline ValidationReport run_validation(const Dataset& data, Rule rule, double delta,
                                       std::optional<double> target_error, bool online, unsigned threads)
{
    check_delta(delta);
    if (data.items.empty()) {
        fail(ErrorCode::EmptyInput, "dataset has no items");
    }
    if (rule == Rule::AverageScore && !target_error) {
        fail(ErrorCode::InvalidInputs, "average rule needs a target error E_r");
    }
    const auto outcomes = run_trials(data.items.size(), threads, [&](std::uint64_t i) {
        return validate_item(data.items[i], data.scale, rule, delta, target_error, online);
    });
    ValidationReport report;
    report.rule = rule;
    report.online = online;
    report.delta = delta;
    report.target_error = rule == Rule::AverageScore ? target_error : std::nullopt;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].result) {
            report.skipped.push_back({data.items[i].item_id, outcomes[i].skip_reason});
            continue;
        }
        const auto& v = *outcomes[i].result;
        report.n_test += v.tests;
        report.n_reliable += v.reliable;
        report.per_item.push_back(v);
    }
    report.f_reliable =
        report.n_test == 0 ? 0.0 : static_cast<double>(report.n_reliable) / static_cast<double>(report.n_test);
    return report;
}

} // namespace detail

/// Full-history validation: n' from the full-history estimate, then every
/// prefix of length >= n' is checked against the full-history truth.
inline ValidationReport validate(const Dataset& data, Rule rule, double delta,
                                 std::optional<double> target_error = std::nullopt, unsigned threads = 0)
{
    return detail::run_validation(data, rule, delta, target_error, false, threads);
}

/// Online validation: each prefix counts only once its own inferred n' is met.
inline ValidationReport validate_online(const Dataset& data, Rule rule, double delta,
                                        std::optional<double> target_error = std::nullopt, unsigned threads = 0)
{
    return detail::run_validation(data, rule, delta, target_error, true, threads);
}

// ---------------------------------------------------------------------------
// Distribution of per-item minimum ratings

struct DistributionStats {
    Rule rule = Rule::Majority;
    double delta = 0.0;
    std::optional<double> target_error;
    std::vector<std::int64_t> thresholds;
    std::vector<double> survival; // Pr[n' >= threshold]
    std::vector<std::int64_t> n_primes;
    std::uint64_t item_count = 0;
    std::int64_t reference_n_prime = 0;
    std::uint64_t n_satisfying = 0;
    double f_satisfying = 0.0;
    std::vector<SkippedItem> skipped;
};

/// Lower median of a non-empty sample.
inline std::int64_t lower_median(std::vector<std::int64_t> values)
{
    if (values.empty()) {
        fail(ErrorCode::EmptyInput, "median of an empty sample");
    }
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

/// Survival curve of per-item n' and the fraction of items whose rating
/// count reaches a reference n' (default: the median n').
inline DistributionStats min_ratings_distribution(const Dataset& data, Rule rule, double delta,
                                                  std::optional<double> target_error,
                                                  std::vector<std::int64_t> thresholds,
                                                  std::optional<std::int64_t> reference = std::nullopt)
{
    detail::check_delta(delta);
    if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
        fail(ErrorCode::InvalidInputs, "thresholds must be sorted ascending");
    }
    DistributionStats stats;
    stats.rule = rule;
    stats.delta = delta;
    stats.target_error = rule == Rule::AverageScore ? target_error : std::nullopt;
    stats.item_count = data.items.size();
    for (const auto& item : data.items) {
        if (item.events.empty()) {
            stats.skipped.push_back({item.item_id, "EmptyInput"});
            continue;
        }
        const auto n_prime = detail::try_min_ratings(item.counts(data.scale), rule, delta, target_error);
        if (!n_prime) {
            stats.skipped.push_back({item.item_id, "DegenerateMajority"});
            continue;
        }
        stats.n_primes.push_back(*n_prime);
    }
    stats.thresholds = std::move(thresholds);
    stats.survival.reserve(stats.thresholds.size());
    for (std::int64_t t : stats.thresholds) {
        const auto at_least = std::count_if(stats.n_primes.begin(), stats.n_primes.end(),
                                            [t](std::int64_t n) { return n >= t; });
        stats.survival.push_back(stats.n_primes.empty()
                                     ? 0.0
                                     : static_cast<double>(at_least) / static_cast<double>(stats.n_primes.size()));
    }
    if (reference) {
        stats.reference_n_prime = *reference;
    } else if (!stats.n_primes.empty()) {
        stats.reference_n_prime = lower_median(stats.n_primes);
    }
    for (const auto& item : data.items) {
        if (static_cast<std::int64_t>(item.size()) >= stats.reference_n_prime) {
            ++stats.n_satisfying;
        }
    }
    stats.f_satisfying = stats.item_count == 0 ? 0.0
                                              : static_cast<double>(stats.n_satisfying) /
                                                    static_cast<double>(stats.item_count);
    return stats;
}

inline void write_survival_csv(const DistributionStats& stats, std::ostream& out)
{
    out << "n,survival\n";
    for (std::size_t i = 0; i < stats.thresholds.size(); ++i) {
        out << stats.thresholds[i] << ',' << nlohmann::json(stats.survival[i]).dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticSpec {
    int levels = 5;
    std::uint64_t items = 200;
    std::uint64_t ratings_per_item = 2000;
    /// When set every item uses this alpha; otherwise alpha ~ Dirichlet(concentration * 1).
    std::optional<std::vector<double>> fixed_alpha;
    double concentration = 1.0;
    MisbehaviorProfile profile = MisbehaviorProfile::honest();
    std::uint64_t seed = 0;
    std::uint64_t users = 100000;
    std::int64_t start_time = 1'500'000'000;
};

struct ItemTruthRecord {
    std::string item_id;
    std::vector<double> alpha;
    std::optional<int> label;
    double gamma = 0.0;
};

struct SyntheticDataset {
    Dataset data;
    std::vector<ItemTruthRecord> truth;
};

inline SyntheticDataset generate_synthetic(const SyntheticSpec& spec)
{
    const RatingScale scale(spec.levels);
    spec.profile.check_scale(scale);
    if (spec.items < 1 || spec.ratings_per_item < 1 || spec.users < 1) {
        fail(ErrorCode::InvalidInputs, "items, ratings per item and users must be >= 1");
    }
    if (!spec.fixed_alpha && !(spec.concentration > 0.0)) {
        fail(ErrorCode::InvalidInputs, "concentration must be positive");
    }
    std::optional<DirichletParams> fixed;
    if (spec.fixed_alpha) {
        fixed.emplace(*spec.fixed_alpha);
        if (fixed->levels() != spec.levels) {
            fail(ErrorCode::InvalidInputs, "fixed alpha length does not match the rating scale");
        }
    }
    const std::size_t width = std::max<std::size_t>(4, std::to_string(spec.items - 1).size());

    SyntheticDataset out;
    out.data.scale = scale;
    out.data.items.reserve(spec.items);
    out.truth.reserve(spec.items);
    for (std::uint64_t i = 0; i < spec.items; ++i) {
        std::string index = std::to_string(i);
        std::string id = "item" + std::string(width - index.size(), '0') + index;

        DirichletParams params = [&] {
            if (fixed) {
                return *fixed;
            }
            RandomStream alpha_rng(spec.seed, StreamDomain::SyntheticAlpha, i);
            std::vector<double> shape(static_cast<std::size_t>(spec.levels), spec.concentration);
            std::vector<double> draw(shape.size());
            alpha_rng.dirichlet(shape, draw);
            return DirichletParams::from_inferred(draw);
        }();

        RandomStream rng(spec.seed, StreamDomain::SyntheticItem, i);
        RatingSampler sampler(params, spec.profile, Sampler::Marginal);
        ItemHistory item;
        item.item_id = id;
        item.events.reserve(spec.ratings_per_item);
        std::int64_t t = spec.start_time;
        for (std::uint64_t j = 0; j < spec.ratings_per_item; ++j) {
            t += 1 + static_cast<std::int64_t>(rng.below(86400));
            RatingEvent ev;
            ev.item_id = id;
            ev.user_id = "u" + std::to_string(rng.below(spec.users));
            ev.rating = sampler.draw(rng);
            ev.timestamp = t;
            item.events.push_back(std::move(ev));
        }
        out.data.items.push_back(std::move(item));

        ItemTruthRecord truth;
        truth.item_id = id;
        truth.alpha.assign(params.alpha().begin(), params.alpha().end());
        truth.gamma = mean_level(params.alpha());
        try {
            truth.label = ground_truth(params).label;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateMajority) {
                throw;
            }
        }
        out.truth.push_back(std::move(truth));
    }
    return out;
}

inline void write_truth_jsonl(const std::vector<ItemTruthRecord>& truth, std::ostream& out)
{
    for (const auto& rec : truth) {
        nlohmann::ordered_json j;
        j["item_id"] = rec.item_id;
        j["alpha"] = rec.alpha;
        j["label"] = rec.label ? nlohmann::ordered_json(*rec.label) : nlohmann::ordered_json(nullptr);
        j["gamma"] = rec.gamma;
        out << j.dump() << '\n';
    }
}

inline std::vector<ItemTruthRecord> read_truth_jsonl(std::istream& in)
{
    std::vector<ItemTruthRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            ItemTruthRecord rec;
            rec.item_id = j.at("item_id").get<std::string>();
            rec.alpha = j.at("alpha").get<std::vector<double>>();
            if (!j.at("label").is_null()) {
                rec.label = j.at("label").get<int>();
            }
            rec.gamma = j.at("gamma").get<double>();
            out.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::ParseError, detail::line_error(line_no, e.what()));
        }
    }
    return out;
}

} // namespace ratebound

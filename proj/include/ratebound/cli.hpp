#pragma once

// Command-line front end. run() parses arguments, dispatches one subcommand
// and writes a report; it never calls exit(), so it can be driven from tests.
//
// Exit codes: 0 success, 1 an mc-verify check failed, 2 input or usage error.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ratebound/aggregation.hpp"
#include "ratebound/bounds.hpp"
#include "ratebound/dataset.hpp"
#include "ratebound/error.hpp"
#include "ratebound/inference.hpp"
#include "ratebound/rating_model.hpp"
#include "ratebound/rational.hpp"
#include "ratebound/report.hpp"
#include "ratebound/simulation.hpp"

namespace ratebound::cli {

inline constexpr const char* kSeedEnv = "RATEBOUND_SEED";

enum class OutputFormat { Json, Csv, Table };

struct RunConfig {
    std::string command;
    std::string rule = "majority";
    int m = 0; // 0: take from alpha, else 5
    std::string alpha;
    std::string counts;
    std::string dataset;
    std::string dataset_format = "auto";
    double delta = 0.2;
    std::optional<double> target_error;
    std::optional<double> epsilon;
    std::string profile = "honest";
    double f = 0.0;
    double f_prime = 0.0;
    int target = 0;
    std::string mode = "resist";
    std::optional<std::uint64_t> n;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 0;
    std::string sampler = "marginal";
    std::string assignment = "iid";
    unsigned threads = 0;
    std::string thresholds;
    std::int64_t step = 50;
    std::optional<std::int64_t> max_threshold;
    std::optional<std::int64_t> reference;
    std::string curve_csv;
    std::uint64_t items = 200;
    std::uint64_t ratings_per_item = 2000;
    double concentration = 1.0;
    std::uint64_t users = 100000;
    std::string truth;
    bool no_items = false;
    std::string output;
    std::string format = "json";
};

/// The resolved configuration as embedded in reports. Thread count and
/// output destination are left out: they never change results.
inline Json config_json(const RunConfig& c)
{
    Json j;
    j["command"] = c.command;
    j["rule"] = c.rule;
    j["m"] = c.m;
    if (!c.alpha.empty()) j["alpha"] = c.alpha;
    if (!c.counts.empty()) j["counts"] = c.counts;
    if (!c.dataset.empty()) j["dataset"] = c.dataset;
    j["delta"] = c.delta;
    j["target_error"] = c.target_error ? Json(*c.target_error) : Json(nullptr);
    j["epsilon"] = c.epsilon ? Json(*c.epsilon) : Json(nullptr);
    j["profile"] = c.profile;
    j["f"] = c.f;
    j["f_prime"] = c.f_prime;
    j["target"] = c.target;
    j["mode"] = c.mode;
    j["n"] = c.n ? Json(*c.n) : Json(nullptr);
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["sampler"] = c.sampler;
    j["assignment"] = c.assignment;
    if (c.command == "survival") {
        j["thresholds"] = c.thresholds;
        j["step"] = c.step;
        j["max_threshold"] = c.max_threshold ? Json(*c.max_threshold) : Json(nullptr);
        j["reference"] = c.reference ? Json(*c.reference) : Json(nullptr);
    }
    if (c.command == "synth") {
        j["items"] = c.items;
        j["ratings_per_item"] = c.ratings_per_item;
        j["concentration"] = c.concentration;
        j["users"] = c.users;
    }
    return j;
}

namespace detail {

inline Error usage(const std::string& msg)
{
    return Error(ErrorCode::InvalidInputs, msg);
}

inline MisbehaviorProfile make_profile(const RunConfig& c)
{
    if (c.profile == "honest") {
        return MisbehaviorProfile::honest();
    }
    if (c.profile == "random") {
        return MisbehaviorProfile::random(c.f);
    }
    if (c.profile == "biased") {
        if (c.target == 0) {
            throw usage("--profile biased needs --target");
        }
        return MisbehaviorProfile::biased(c.f_prime, c.target);
    }
    throw usage("unknown profile '" + c.profile + "' (expected honest|random|biased)");
}

inline DirichletParams require_alpha(const RunConfig& c)
{
    if (c.alpha.empty()) {
        throw usage("--alpha is required");
    }
    DirichletParams params(parse_alpha(c.alpha));
    if (c.m != 0 && c.m != params.levels()) {
        throw usage("--m does not match the length of --alpha");
    }
    return params;
}

inline int levels(const RunConfig& c)
{
    if (c.m != 0) {
        return c.m;
    }
    if (!c.alpha.empty()) {
        return static_cast<int>(parse_rational_list(c.alpha).size());
    }
    if (!c.counts.empty()) {
        return static_cast<int>(parse_rational_list(c.counts).size());
    }
    return 5;
}

inline RatingMultiset parse_counts(const RunConfig& c)
{
    std::vector<std::uint64_t> counts;
    for (const auto& r : parse_rational_list(c.counts)) {
        if (r.den != 1 || r.num < 0) {
            throw usage("--counts must be non-negative integers");
        }
        counts.push_back(static_cast<std::uint64_t>(r.num));
    }
    if (c.m != 0 && static_cast<int>(counts.size()) != c.m) {
        throw usage("--m does not match the length of --counts");
    }
    return RatingMultiset(std::move(counts));
}

inline Dataset load_dataset(const RunConfig& c)
{
    if (c.dataset.empty()) {
        throw usage("--dataset is required");
    }
    std::ifstream in(c.dataset);
    if (!in) {
        throw usage("cannot open dataset '" + c.dataset + "'");
    }
    InputFormat fmt = InputFormat::Auto;
    if (c.dataset_format == "csv") fmt = InputFormat::Csv;
    else if (c.dataset_format == "jsonl") fmt = InputFormat::JsonLines;
    else if (c.dataset_format != "auto") throw usage("--dataset-format must be auto|csv|jsonl");
    return ingest(in, RatingScale(levels(c)), fmt);
}

inline Sampler parse_sampler(const std::string& s)
{
    if (s == "marginal") return Sampler::Marginal;
    if (s == "two-stage") return Sampler::TwoStage;
    throw usage("--sampler must be marginal|two-stage");
}

inline AttackerAssignment parse_assignment(const std::string& s)
{
    if (s == "iid") return AttackerAssignment::Iid;
    if (s == "exact") return AttackerAssignment::ExactCount;
    throw usage("--assignment must be iid|exact");
}

/// Epsilon for average-rule commands: --epsilon directly, or solved from
/// --er and the gamma implied by alpha.
inline double resolve_epsilon(const RunConfig& c, std::optional<double> gamma)
{
    if (c.epsilon) {
        return *c.epsilon;
    }
    if (!c.target_error) {
        throw usage("average rule needs --epsilon or --er");
    }
    if (!gamma) {
        throw usage("--er needs --alpha to determine gamma (or pass --epsilon)");
    }
    return solve_epsilon(*c.target_error, levels(c), *gamma);
}

inline std::vector<std::int64_t> resolve_thresholds(const RunConfig& c, const DistributionStats* probe)
{
    std::vector<std::int64_t> out;
    if (!c.thresholds.empty()) {
        for (const auto& r : parse_rational_list(c.thresholds)) {
            if (r.den != 1) {
                throw usage("--thresholds must be integers");
            }
            out.push_back(r.num);
        }
        return out;
    }
    if (c.step <= 0) {
        throw usage("--step must be positive");
    }
    std::int64_t max = c.max_threshold.value_or(0);
    if (!c.max_threshold && probe != nullptr) {
        for (auto n : probe->n_primes) {
            max = std::max(max, n);
        }
    }
    for (std::int64_t t = 0; t <= max; t += c.step) {
        out.push_back(t);
    }
    return out;
}

inline void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows)
{
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
        }
        return;
    }
    if (j.is_array()) {
        bool scalars = true;
        for (const auto& el : j) {
            scalars = scalars && !el.is_structured();
        }
        if (!scalars) {
            rows.emplace_back(prefix, "[" + std::to_string(j.size()) + " entries]");
            return;
        }
        std::string joined;
        for (const auto& el : j) {
            if (!joined.empty()) joined += ' ';
            joined += el.is_string() ? el.get<std::string>() : el.dump();
        }
        rows.emplace_back(prefix, joined);
        return;
    }
    if (j.is_number_float()) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(3) << j.get<double>();
        rows.emplace_back(prefix, os.str());
        return;
    }
    rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
}

inline std::string render(const Json& report, const std::string& format)
{
    if (format == "json") {
        return report.dump(2) + "\n";
    }
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(report.at("result"), "", rows);
    std::ostringstream os;
    if (format == "csv") {
        os << "key,value\n";
        for (const auto& [k, v] : rows) {
            os << k << ',' << v << '\n';
        }
    } else {
        std::size_t width = 0;
        for (const auto& row : rows) {
            width = std::max(width, row.first.size());
        }
        for (const auto& [k, v] : rows) {
            os << std::left << std::setw(static_cast<int>(width)) << k << "  " << v << '\n';
        }
    }
    return os.str();
}

// Subcommand bodies. Each returns the "result" object and may set pass/fail.

inline Json cmd_bound(const RunConfig& c)
{
    const Rule rule = parse_rule(c.rule);
    const MisbehaviorProfile profile = make_profile(c);
    Json result;
    if (rule == Rule::Majority) {
        const DirichletParams params = require_alpha(c);
        BoundResult bound;
        std::string kind_name;
        switch (profile.kind()) {
        case MisbehaviorKind::Honest:
            bound = majority_honest_bound(params, c.delta);
            kind_name = "honest";
            break;
        case MisbehaviorKind::Random:
            bound = majority_random_bound(params, c.delta, c.f);
            kind_name = "random";
            break;
        case MisbehaviorKind::Biased:
            if (c.mode == "win") {
                bound = biased_win_bound(params, c.delta, c.f_prime, c.target);
                kind_name = "biased-win";
            } else if (c.mode == "resist") {
                bound = biased_resist_bound(params, c.delta, c.f_prime, c.target);
                kind_name = "biased-resist";
            } else {
                throw usage("--mode must be resist|win");
            }
            break;
        }
        result["bound"] = kind_name;
        result["raw"] = bound.raw;
        result["n_prime"] = bound.n_prime;
        result["detail"] = to_json(bound);
        return result;
    }

    std::optional<DirichletParams> params;
    std::optional<double> gamma;
    if (!c.alpha.empty()) {
        params.emplace(require_alpha(c));
        gamma = mean_level(params->alpha());
    }
    const int m = levels(c);
    const double epsilon = resolve_epsilon(c, gamma);
    BoundResult bound = average_honest_bound(epsilon, m, c.delta, gamma);
    if (c.target_error && !c.epsilon) {
        bound.inputs.target_error = *c.target_error;
    }
    bound.inputs.profile = profile;
    if (params) {
        bound.inputs.alpha.assign(params->alpha().begin(), params->alpha().end());
    }
    result["bound"] = "average-" + to_string(profile.kind());
    result["raw"] = bound.raw;
    result["n_prime"] = bound.n_prime;
    result["epsilon"] = epsilon;
    if (params) {
        ErrorInterval interval;
        switch (profile.kind()) {
        case MisbehaviorKind::Honest: interval = average_honest_interval(*params, epsilon, c.delta); break;
        case MisbehaviorKind::Random: interval = average_random_interval(*params, epsilon, c.f, c.delta); break;
        case MisbehaviorKind::Biased:
            interval = average_biased_interval(*params, epsilon, c.f_prime, c.target, c.delta);
            break;
        }
        result["interval"] = to_json(interval);
    } else if (profile.kind() != MisbehaviorKind::Honest) {
        throw usage("average-rule misbehaviour intervals need --alpha");
    }
    result["detail"] = to_json(bound);
    return result;
}

inline Json cmd_threshold(const RunConfig& c)
{
    const DirichletParams params = require_alpha(c);
    const GroundTruth truth = ground_truth(params);
    Json result;
    result["label"] = truth.label;
    if (c.target != 0) {
        result["target"] = c.target;
        result["threshold"] = biased_win_threshold(params, c.target);
        return result;
    }
    Json all = Json::array();
    for (int k = 1; k <= params.levels(); ++k) {
        all.push_back(biased_win_threshold(params, k));
    }
    result["thresholds"] = std::move(all);
    return result;
}

inline Json cmd_mc_verify(const RunConfig& c, bool& passed)
{
    const Rule rule = parse_rule(c.rule);
    const MisbehaviorProfile profile = make_profile(c);
    const DirichletParams params = require_alpha(c);
    const GroundTruth truth = ground_truth(params);
    SimConfig sim{params, profile, 1, c.trials, c.seed, parse_sampler(c.sampler), parse_assignment(c.assignment),
                  c.threads};
    const double slack = 3.0 * std::sqrt(c.delta / static_cast<double>(c.trials));
    Json result;

    if (rule == Rule::Majority) {
        BoundResult bound;
        FailureMode fmode = FailureMode::MissTruth;
        std::string check;
        switch (profile.kind()) {
        case MisbehaviorKind::Honest: bound = majority_honest_bound(params, c.delta); break;
        case MisbehaviorKind::Random: bound = majority_random_bound(params, c.delta, c.f); break;
        case MisbehaviorKind::Biased:
            if (c.mode == "win") {
                bound = biased_win_bound(params, c.delta, c.f_prime, c.target);
                fmode = FailureMode::AttackerWin;
            } else {
                bound = biased_resist_bound(params, c.delta, c.f_prime, c.target);
            }
            break;
        }
        sim.n = c.n.value_or(static_cast<std::uint64_t>(std::max<std::int64_t>(1, bound.n_prime)));
        const FailureEstimate est = estimate_failure_rate(sim, truth, fmode);
        const double limit = c.delta + slack;
        passed = est.rate <= limit;
        result["check"] = fmode == FailureMode::AttackerWin ? "attacker_win_rate >= 1 - delta - slack"
                                                            : "failure_rate <= delta + slack";
        result["bound"] = to_json(bound);
        result["n"] = sim.n;
        result["estimate"] = to_json(est);
        if (fmode == FailureMode::AttackerWin) {
            result["attacker_win_rate"] = 1.0 - est.rate;
            result["required"] = 1.0 - c.delta - slack;
        } else {
            result["required"] = limit;
        }
        result["pass"] = passed;
        return result;
    }

    const double epsilon = resolve_epsilon(c, truth.mean);
    ErrorInterval interval;
    switch (profile.kind()) {
    case MisbehaviorKind::Honest: interval = average_honest_interval(params, epsilon, c.delta); break;
    case MisbehaviorKind::Random: interval = average_random_interval(params, epsilon, c.f, c.delta); break;
    case MisbehaviorKind::Biased:
        interval = average_biased_interval(params, epsilon, c.f_prime, c.target, c.delta);
        break;
    }
    sim.n = c.n.value_or(static_cast<std::uint64_t>(std::ceil(interval.min_ratings)));
    const double q = estimate_abs_error_quantile(sim, truth, 1.0 - c.delta);
    passed = q >= interval.lower && q <= interval.upper;
    result["check"] = "lower <= quantile(|r - gamma|, 1 - delta) <= upper";
    result["epsilon"] = epsilon;
    result["interval"] = to_json(interval);
    result["n"] = sim.n;
    result["quantile"] = 1.0 - c.delta;
    result["abs_error_quantile"] = q;
    result["pass"] = passed;
    return result;
}

inline Json cmd_infer_alpha(const RunConfig& c)
{
    Json result;
    if (!c.counts.empty()) {
        result["inferred"] = to_json(infer_alpha(parse_counts(c)));
        return result;
    }
    const Dataset data = load_dataset(c);
    Json items = Json::array();
    for (const auto& item : data.items) {
        Json j = to_json(infer_alpha(item.counts(data.scale)));
        j["item_id"] = item.item_id;
        items.push_back(std::move(j));
    }
    result["items"] = std::move(items);
    return result;
}

inline Json cmd_infer_min(const RunConfig& c)
{
    const Rule rule = parse_rule(c.rule);
    Json result;
    if (!c.counts.empty()) {
        const BoundResult b = infer_min_ratings(parse_counts(c), rule, c.delta, c.target_error);
        result["raw"] = b.raw;
        result["n_prime"] = b.n_prime;
        result["detail"] = to_json(b);
        return result;
    }
    const Dataset data = load_dataset(c);
    Json items = Json::array();
    for (const auto& item : data.items) {
        Json j;
        j["item_id"] = item.item_id;
        j["n_ratings"] = item.size();
        try {
            const BoundResult b = infer_min_ratings(item.counts(data.scale), rule, c.delta, c.target_error);
            j["raw"] = b.raw;
            j["n_prime"] = b.n_prime;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateMajority) {
                throw;
            }
            j["error"] = std::string(e.name());
        }
        items.push_back(std::move(j));
    }
    result["items"] = std::move(items);
    return result;
}

inline Json cmd_validate(const RunConfig& c, bool online)
{
    const Rule rule = parse_rule(c.rule);
    const Dataset data = load_dataset(c);
    const ValidationReport report = online ? validate_online(data, rule, c.delta, c.target_error, c.threads)
                                           : validate(data, rule, c.delta, c.target_error, c.threads);
    return to_json(report, !c.no_items);
}

inline Json cmd_survival(const RunConfig& c, std::ostream& err)
{
    const Rule rule = parse_rule(c.rule);
    const Dataset data = load_dataset(c);
    DistributionStats stats;
    if (c.thresholds.empty() && !c.max_threshold) {
        const DistributionStats probe = min_ratings_distribution(data, rule, c.delta, c.target_error, {}, c.reference);
        stats = min_ratings_distribution(data, rule, c.delta, c.target_error, resolve_thresholds(c, &probe),
                                         c.reference);
    } else {
        stats = min_ratings_distribution(data, rule, c.delta, c.target_error, resolve_thresholds(c, nullptr),
                                         c.reference);
    }
    if (!c.curve_csv.empty()) {
        std::ofstream out(c.curve_csv);
        if (!out) {
            throw usage("cannot write '" + c.curve_csv + "'");
        }
        write_survival_csv(stats, out);
    }
    (void)err;
    return to_json(stats);
}

inline Json cmd_synth(const RunConfig& c)
{
    if (c.dataset.empty()) {
        throw usage("synth needs --dataset <path> to write");
    }
    SyntheticSpec spec;
    spec.levels = levels(c);
    spec.items = c.items;
    spec.ratings_per_item = c.ratings_per_item;
    if (!c.alpha.empty()) {
        const DirichletParams fixed = require_alpha(c);
        spec.fixed_alpha = std::vector<double>(fixed.alpha().begin(), fixed.alpha().end());
    }
    spec.concentration = c.concentration;
    spec.profile = make_profile(c);
    spec.seed = c.seed;
    spec.users = c.users;
    const SyntheticDataset synth = generate_synthetic(spec);

    std::ofstream out(c.dataset, std::ios::binary);
    if (!out) {
        throw usage("cannot write '" + c.dataset + "'");
    }
    if (c.dataset_format == "jsonl") {
        for (const auto& item : synth.data.items) {
            for (const auto& ev : item.events) {
                Json j;
                j["item_id"] = ev.item_id;
                j["user_id"] = ev.user_id;
                j["rating"] = ev.rating;
                j["timestamp"] = ev.timestamp;
                out << j.dump() << '\n';
            }
        }
    } else {
        write_csv(synth.data, out);
    }
    const std::string truth_path = c.truth.empty() ? c.dataset + ".truth.jsonl" : c.truth;
    std::ofstream truth_out(truth_path, std::ios::binary);
    if (!truth_out) {
        throw usage("cannot write '" + truth_path + "'");
    }
    write_truth_jsonl(synth.truth, truth_out);

    Json result;
    result["dataset"] = c.dataset;
    result["truth"] = truth_path;
    result["items"] = synth.data.items.size();
    result["ratings"] = synth.data.rating_count();
    return result;
}

/// Expands --config FILE into flags. Lines are `key = value` (or a bare
/// `key` / `key = true` for switches); '#' starts a comment. The expanded
/// flags come before the command-line ones, which therefore win.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args)
{
    std::vector<std::string> injected;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
            continue;
        }
        std::ifstream in(path);
        if (!in) {
            throw usage("cannot open config file '" + path + "'");
        }
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                line.erase(hash);
            }
            const auto eq = line.find('=');
            std::string key(::ratebound::detail::trim(line.substr(0, eq)));
            if (key.empty()) {
                continue;
            }
            if (key.rfind("--", 0) != 0) {
                key = "--" + key;
            }
            if (eq == std::string::npos) {
                injected.push_back(key);
                continue;
            }
            std::string value(::ratebound::detail::trim(line.substr(eq + 1)));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
                value = value.substr(1, value.size() - 2);
            }
            if (value == "true") {
                injected.push_back(key);
            } else if (value != "false") {
                injected.push_back(key);
                injected.push_back(value);
            }
        }
    }
    if (rest.empty()) {
        return injected;
    }
    // Subcommand name stays first.
    std::vector<std::string> out{rest.front()};
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), rest.begin() + 1, rest.end());
    return out;
}

} // namespace detail

/// Runs one CLI invocation. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err)
{
    RunConfig c;
    if (const char* env = std::getenv(kSeedEnv)) {
        try {
            c.seed = std::stoull(env);
        } catch (const std::exception&) {
            err << "error: InvalidInputs: " << kSeedEnv << " must be an unsigned integer\n";
            return 2;
        }
    }

    CLI::App app{"Minimum-rating bounds, misbehaviour thresholds and validation for rating aggregation"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--output,-o", c.output, "Write the report here instead of stdout");
        sub->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "csv", "table"}));
    };
    auto model = [&](CLI::App* sub) {
        sub->add_option("--alpha", c.alpha, "Collective behaviour, e.g. 4/35,25/35,3/35,2/35,1/35");
        sub->add_option("--m", c.m, "Number of rating levels");
        sub->add_option("--delta", c.delta, "Failure probability in (0,1)");
        sub->add_option("--rule", c.rule, "majority|average");
    };
    auto misbehaviour = [&](CLI::App* sub) {
        sub->add_option("--profile", c.profile, "honest|random|biased");
        sub->add_option("--f", c.f, "Random misbehaviour fraction");
        sub->add_option("--f-prime", c.f_prime, "Biased misbehaviour fraction");
        sub->add_option("--target", c.target, "Level the biased raters push");
        sub->add_option("--mode", c.mode, "Biased majority bound: resist|win");
        sub->add_option("--er", c.target_error, "Target absolute error for the average rule");
        sub->add_option("--epsilon", c.epsilon, "Epsilon for the average rule");
    };
    auto data = [&](CLI::App* sub) {
        sub->add_option("--dataset", c.dataset, "Rating log (CSV or JSON lines)");
        sub->add_option("--dataset-format", c.dataset_format, "auto|csv|jsonl");
        sub->add_option("--m", c.m, "Number of rating levels (default 5)");
        sub->add_option("--rule", c.rule, "majority|average");
        sub->add_option("--delta", c.delta, "Failure probability in (0,1)");
        sub->add_option("--er", c.target_error, "Target absolute error for the average rule");
        sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    };

    auto* bound = app.add_subcommand("bound", "Minimum number of ratings / average-rule error interval");
    model(bound);
    misbehaviour(bound);
    common(bound);

    auto* threshold = app.add_subcommand("threshold", "Biased fraction above which attackers control the majority");
    threshold->add_option("--alpha", c.alpha, "Collective behaviour")->required();
    threshold->add_option("--target", c.target, "Target level (omit for all levels)");
    common(threshold);

    auto* mc = app.add_subcommand("mc-verify", "Check a bound against seeded Monte Carlo trials");
    model(mc);
    misbehaviour(mc);
    mc->add_option("--n", c.n, "Ratings per trial (default: the bound's n')");
    mc->add_option("--trials", c.trials, "Monte Carlo trials");
    mc->add_option("--seed", c.seed, "Seed (default from RATEBOUND_SEED, else 0)");
    mc->add_option("--sampler", c.sampler, "marginal|two-stage");
    mc->add_option("--assignment", c.assignment, "iid|exact");
    mc->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    common(mc);

    auto* ia = app.add_subcommand("infer-alpha", "Maximum-likelihood alpha from rating counts or a dataset");
    ia->add_option("--counts", c.counts, "Counts per level, e.g. 2,5,3");
    ia->add_option("--dataset", c.dataset, "Rating log");
    ia->add_option("--dataset-format", c.dataset_format, "auto|csv|jsonl");
    ia->add_option("--m", c.m, "Number of rating levels");
    common(ia);

    auto* im = app.add_subcommand("infer-min", "Minimum number of ratings inferred from history");
    im->add_option("--counts", c.counts, "Counts per level");
    data(im);
    common(im);

    auto* val = app.add_subcommand("validate", "Prefix validation with n' from each item's full history");
    data(val);
    val->add_flag("--no-items", c.no_items, "Omit the per-item table");
    common(val);

    auto* valo = app.add_subcommand("validate-online", "Prefix validation with n' inferred at each prefix");
    data(valo);
    valo->add_flag("--no-items", c.no_items, "Omit the per-item table");
    common(valo);

    auto* surv = app.add_subcommand("survival", "Distribution Pr[n' >= n] across items");
    data(surv);
    surv->add_option("--thresholds", c.thresholds, "Comma-separated ascending n values");
    surv->add_option("--step", c.step, "Grid step when --thresholds is omitted");
    surv->add_option("--max", c.max_threshold, "Grid maximum (default: largest n')");
    surv->add_option("--reference", c.reference, "Reference n' for the sufficiency fraction (default: median)");
    surv->add_option("--curve-csv", c.curve_csv, "Also write the curve as n,survival CSV");
    common(surv);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic rating log with a ground-truth sidecar");
    synth->add_option("--dataset", c.dataset, "Output rating log path")->required();
    synth->add_option("--dataset-format", c.dataset_format, "csv|jsonl");
    synth->add_option("--truth", c.truth, "Ground-truth sidecar (default <dataset>.truth.jsonl)");
    synth->add_option("--items", c.items, "Number of items");
    synth->add_option("--ratings-per-item", c.ratings_per_item, "Ratings per item");
    synth->add_option("--m", c.m, "Number of rating levels (default 5)");
    synth->add_option("--alpha", c.alpha, "Fixed alpha for every item");
    synth->add_option("--concentration", c.concentration, "Symmetric Dirichlet concentration for per-item alpha");
    synth->add_option("--users", c.users, "Size of the user-id pool");
    synth->add_option("--seed", c.seed, "Seed (default from RATEBOUND_SEED, else 0)");
    synth->add_option("--profile", c.profile, "honest|random|biased");
    synth->add_option("--f", c.f, "Random misbehaviour fraction");
    synth->add_option("--f-prime", c.f_prime, "Biased misbehaviour fraction");
    synth->add_option("--target", c.target, "Level the biased raters push");
    common(synth);

    try {
        args = detail::expand_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    c.command = chosen->get_name();
    int code = 0;
    Json report;
    try {
        bool passed = true;
        Json result;
        if (c.command == "bound") result = detail::cmd_bound(c);
        else if (c.command == "threshold") result = detail::cmd_threshold(c);
        else if (c.command == "mc-verify") result = detail::cmd_mc_verify(c, passed);
        else if (c.command == "infer-alpha") result = detail::cmd_infer_alpha(c);
        else if (c.command == "infer-min") result = detail::cmd_infer_min(c);
        else if (c.command == "validate") result = detail::cmd_validate(c, false);
        else if (c.command == "validate-online") result = detail::cmd_validate(c, true);
        else if (c.command == "survival") result = detail::cmd_survival(c, err);
        else if (c.command == "synth") result = detail::cmd_synth(c);
        c.m = detail::levels(c);
        report["config"] = config_json(c);
        report["result"] = std::move(result);
        code = passed ? 0 : 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    const std::string text = detail::render(report, c.format);
    if (c.output.empty()) {
        out << text;
    } else {
        std::ofstream file(c.output, std::ios::binary);
        if (!file) {
            err << "error: InvalidInputs: cannot write '" << c.output << "'\n";
            return 2;
        }
        file << text;
    }
    return code;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

} // namespace ratebound::cli

#pragma once

// JSON encodings of result types. Keys are emitted in a fixed order so
// equal inputs give byte-identical reports.

#include <json.hpp>

#include "ratebound/bounds.hpp"
#include "ratebound/dataset.hpp"
#include "ratebound/inference.hpp"
#include "ratebound/simulation.hpp"

namespace ratebound {

using Json = nlohmann::ordered_json;

inline Json to_json(const MisbehaviorProfile& p)
{
    Json j;
    j["kind"] = to_string(p.kind());
    j["fraction"] = p.fraction();
    if (p.kind() == MisbehaviorKind::Biased) {
        j["target"] = p.target();
    }
    return j;
}

inline Json to_json(const BoundResult& b)
{
    Json j;
    j["raw"] = b.raw;
    j["n_prime"] = b.n_prime;
    Json in;
    in["rule"] = to_string(b.inputs.rule);
    in["m"] = b.inputs.levels;
    if (!b.inputs.alpha.empty()) {
        in["alpha"] = b.inputs.alpha;
    }
    in["delta"] = b.inputs.delta;
    in["profile"] = to_json(b.inputs.profile);
    if (b.inputs.target_error) {
        in["target_error"] = *b.inputs.target_error;
    }
    if (b.inputs.epsilon) {
        in["epsilon"] = *b.inputs.epsilon;
    }
    j["inputs"] = std::move(in);
    return j;
}

inline Json to_json(const ErrorInterval& e)
{
    Json j;
    j["lower"] = e.lower;
    j["upper"] = e.upper;
    j["raw_lower"] = e.raw_lower;
    j["confidence"] = e.confidence;
    j["min_ratings"] = e.min_ratings;
    return j;
}

inline Json to_json(const FailureEstimate& f)
{
    Json j;
    j["rate"] = f.rate;
    j["std_err"] = f.std_err;
    j["trials"] = f.trials;
    j["failures"] = f.failures;
    return j;
}

inline Json to_json(const InferredParams& p)
{
    Json j;
    j["alpha_hat"] = p.alpha_hat;
    j["counts"] = p.counts;
    j["n"] = p.n;
    return j;
}

inline Json to_json(const ValidationReport& r, bool include_items = true)
{
    Json j;
    j["rule"] = to_string(r.rule);
    j["online"] = r.online;
    j["delta"] = r.delta;
    if (r.target_error) {
        j["target_error"] = *r.target_error;
    }
    j["n_test"] = r.n_test;
    j["n_reliable"] = r.n_reliable;
    j["f_reliable"] = r.f_reliable;
    Json skipped = Json::array();
    for (const auto& s : r.skipped) {
        skipped.push_back({{"item_id", s.item_id}, {"reason", s.reason}});
    }
    j["skipped"] = std::move(skipped);
    if (include_items) {
        Json items = Json::array();
        for (const auto& v : r.per_item) {
            Json item;
            item["item_id"] = v.item_id;
            item["n_ratings"] = v.n_ratings;
            item["n_prime"] = v.n_prime;
            item["true_quality"] = v.true_quality;
            item["tests"] = v.tests;
            item["reliable"] = v.reliable;
            item["failed"] = v.tests - v.reliable;
            if (r.online) {
                item["skipped_prefixes"] = v.skipped_prefixes;
            }
            items.push_back(std::move(item));
        }
        j["per_item"] = std::move(items);
    }
    return j;
}

inline Json to_json(const DistributionStats& s)
{
    Json j;
    j["rule"] = to_string(s.rule);
    j["delta"] = s.delta;
    if (s.target_error) {
        j["target_error"] = *s.target_error;
    }
    j["item_count"] = s.item_count;
    j["thresholds"] = s.thresholds;
    j["survival"] = s.survival;
    j["reference_n_prime"] = s.reference_n_prime;
    j["n_satisfying"] = s.n_satisfying;
    j["f_satisfying"] = s.f_satisfying;
    Json skipped = Json::array();
    for (const auto& sk : s.skipped) {
        skipped.push_back({{"item_id", sk.item_id}, {"reason", sk.reason}});
    }
    j["skipped"] = std::move(skipped);
    return j;
}

} // namespace ratebound

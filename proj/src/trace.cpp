#include "earlyguard/trace.hpp"

#include <cmath>
#include <unordered_set>

#include "earlyguard/errors.hpp"

namespace earlyguard {

void validate_snapshot(const Snapshot& s, const std::string& context) {
    for (int i = 0; i < kNumFeatures; ++i) {
        const double x = s[i];
        if (!std::isfinite(x))
            throw ValidationError(context + ": feature " + std::string(kFeatureNames[static_cast<std::size_t>(i)]) +
                                  " is not finite");
        if (i <= static_cast<int>(Feature::cpu_user)) {
            if (x < 0.0 || x > 100.0)
                throw ValidationError(context + ": " + std::string(kFeatureNames[static_cast<std::size_t>(i)]) +
                                      " = " + std::to_string(x) + " outside [0,100]");
        } else if (x < 0.0) {
            throw ValidationError(context + ": " + std::string(kFeatureNames[static_cast<std::size_t>(i)]) +
                                  " = " + std::to_string(x) + " is negative");
        }
    }
}

std::string_view label_name(Label l) { return l == Label::benign ? "benign" : "malicious"; }

Label parse_label(std::string_view s) {
    if (s == "benign") return Label::benign;
    if (s == "malicious") return Label::malicious;
    throw ValidationError("unknown label '" + std::string(s) + "' (expected benign|malicious)");
}

std::size_t LabeledDataset::count_label(Label l) const {
    std::size_t n = 0;
    for (const auto& t : traces)
        if (t.label == l) ++n;
    return n;
}

void validate_unique_ids(const LabeledDataset& d) {
    std::unordered_set<std::string> seen;
    for (const auto& t : d.traces)
        if (!seen.insert(t.sample_id).second)
            throw ValidationError("duplicate sample_id '" + t.sample_id + "' in dataset");
}

EngineVerdict label_from_engine_count(std::uint32_t detections) {
    if (detections >= 5) return EngineVerdict::malicious;
    if (detections == 0) return EngineVerdict::benign;
    return EngineVerdict::excluded;
}

std::pair<LabeledDataset, LabeledDataset> split_by_date(const std::vector<BehaviorTrace>& traces,
                                                        std::int64_t cutoff) {
    LabeledDataset train, test;
    train.role = DatasetRole::train;
    test.role = DatasetRole::test;
    for (const auto& t : traces) {
        if (t.first_seen < cutoff)
            train.traces.push_back(t);
        else
            test.traces.push_back(t);
    }
    if (train.traces.empty()) throw ValidationError("date split: no trace first seen before the cutoff");
    if (test.traces.empty()) throw ValidationError("date split: no trace first seen at or after the cutoff");
    train.provenance = "first_seen before cutoff";
    test.provenance = "first_seen at or after cutoff";
    return {std::move(train), std::move(test)};
}

BehaviorTrace truncate_to_time(const BehaviorTrace& trace, int t_seconds) {
    if (t_seconds < 0) throw ValidationError("truncate_to_time: negative time");
    const auto need = static_cast<std::size_t>(t_seconds) + 1;
    if (trace.snapshots.size() < need)
        throw ValidationError("trace '" + trace.sample_id + "' has " + std::to_string(trace.snapshots.size()) +
                              " snapshots, needs " + std::to_string(need) + " for t=" + std::to_string(t_seconds));
    BehaviorTrace out = trace;
    out.snapshots.resize(need);
    return out;
}

GroupKey parse_group_key(std::string_view s) {
    if (s == "family") return GroupKey::family;
    if (s == "variant") return GroupKey::variant;
    throw ValidationError("unknown holdout key '" + std::string(s) + "' (expected family|variant)");
}

std::string_view group_key_name(GroupKey k) { return k == GroupKey::family ? "family" : "variant"; }

std::pair<LabeledDataset, LabeledDataset> holdout_group(const LabeledDataset& dataset, GroupKey key,
                                                        const std::string& value, bool exclude_disputed) {
    const auto field = [key](const BehaviorTrace& t) -> const std::string& {
        return key == GroupKey::family ? t.family : t.variant;
    };
    LabeledDataset remain, held;
    remain.role = DatasetRole::train;
    held.role = DatasetRole::test;
    for (const auto& t : dataset.traces) {
        if (field(t) == value) {
            held.traces.push_back(t);
        } else if (exclude_disputed && t.family == kDisputedFamily) {
            continue;
        } else {
            remain.traces.push_back(t);
        }
    }
    if (held.traces.empty())
        throw ValidationError("holdout: no trace with " + std::string(group_key_name(key)) + " = '" + value + "'");
    if (remain.traces.empty())
        throw ValidationError("holdout of " + std::string(group_key_name(key)) + " = '" + value +
                              "' leaves an empty training set");
    remain.provenance = "holdout " + std::string(group_key_name(key)) + "!=" + value;
    held.provenance = "holdout " + std::string(group_key_name(key)) + "==" + value;
    return {std::move(remain), std::move(held)};
}

}  // namespace earlyguard

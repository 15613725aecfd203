#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace earlyguard {

inline constexpr int kNumFeatures = 10;

// Fixed feature order of a machine-activity snapshot. Everything downstream
// (CSV columns, standardized sequences, ablation indices) uses this order.
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "cpu_system",      "cpu_user",       "packets_sent", "packets_received", "bytes_sent",
    "bytes_received",  "memory_mb",      "swap_mb",      "total_processes",  "max_process_id",
};

enum class Feature : int {
    cpu_system = 0,
    cpu_user = 1,
    packets_sent = 2,
    packets_received = 3,
    bytes_sent = 4,
    bytes_received = 5,
    memory_mb = 6,
    swap_mb = 7,
    total_processes = 8,
    max_process_id = 9,
};

/// One per-second measurement of the ten machine-activity counters.
struct Snapshot {
    std::array<double, kNumFeatures> v{};

    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
};

/// Throws ValidationError unless all features are finite, counts/bytes/MB are
/// non-negative, and the two CPU percentages lie in [0, 100]. `context` is
/// prepended to the message (e.g. "sample x, line 12").
void validate_snapshot(const Snapshot& s, const std::string& context);

enum class Label : int { benign = 0, malicious = 1 };

std::string_view label_name(Label l);
Label parse_label(std::string_view s);  // throws ValidationError

/// One executable's labeled activity trace. snapshots[i] was taken i seconds
/// into execution; the prefix available at time t has exactly t+1 entries.
struct BehaviorTrace {
    std::string sample_id;
    Label label = Label::benign;
    std::string family;   // empty if unknown
    std::string variant;  // empty if unknown
    std::int64_t first_seen = 0;  // Unix epoch seconds, UTC
    std::vector<Snapshot> snapshots;
};

enum class DatasetRole { train, test };

struct LabeledDataset {
    std::vector<BehaviorTrace> traces;
    DatasetRole role = DatasetRole::train;
    std::string provenance;

    std::size_t size() const { return traces.size(); }
    std::size_t count_label(Label l) const;
};

/// Throws ValidationError if any sample_id appears twice.
void validate_unique_ids(const LabeledDataset& d);

enum class EngineVerdict { malicious, benign, excluded };

/// Labeling rule from anti-virus engine detection counts: 5 or more engines
/// flagged the file -> malicious; zero -> benign; 1..4 -> excluded as
/// contentious.
EngineVerdict label_from_engine_count(std::uint32_t detections);

/// Splits by first-seen date: strictly before the cutoff -> train, the rest
/// -> test. Throws ValidationError if either side would be empty.
std::pair<LabeledDataset, LabeledDataset> split_by_date(const std::vector<BehaviorTrace>& traces,
                                                        std::int64_t cutoff_epoch_seconds);

/// First t_seconds+1 snapshots with metadata preserved.
/// Throws ValidationError if the trace is shorter than that.
BehaviorTrace truncate_to_time(const BehaviorTrace& trace, int t_seconds);

enum class GroupKey { family, variant };

GroupKey parse_group_key(std::string_view s);  // throws ValidationError
std::string_view group_key_name(GroupKey k);

/// Removes every trace whose family/variant matches `value` from the training
/// side and returns it as the held-out set. When exclude_disputed is set
/// (the holdout-experiment convention), traces with family "disputed" are
/// dropped from the training side as well, without joining the held-out set.
/// Throws ValidationError if `value` does not occur or the training side
/// would be empty.
std::pair<LabeledDataset, LabeledDataset> holdout_group(const LabeledDataset& dataset, GroupKey key,
                                                        const std::string& value,
                                                        bool exclude_disputed = true);

inline constexpr std::string_view kDisputedFamily = "disputed";

}  // namespace earlyguard

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "earlyguard/ensemble.hpp"
#include "earlyguard/gru.hpp"
#include "earlyguard/hyperconfig.hpp"
#include "earlyguard/normalizer.hpp"
#include "earlyguard/trace.hpp"

namespace earlyguard {

/// Anything that can score a trace prefix. Both single networks and
/// ensembles (and the comparison baselines) evaluate through this one
/// interface, so every report uses identical truncations and metrics.
class TraceScorer {
public:
    virtual ~TraceScorer() = default;
    virtual double score(const BehaviorTrace& trace, int t_seconds) const = 0;
};

class GruScorer final : public TraceScorer {
public:
    explicit GruScorer(const GruNetwork& net) : net_(&net) {}
    double score(const BehaviorTrace& trace, int t_seconds) const override {
        return predict_proba(*net_, trace, t_seconds);
    }

private:
    const GruNetwork* net_;
};

class EnsembleScorer final : public TraceScorer {
public:
    explicit EnsembleScorer(const Ensemble& e) : e_(&e) {}
    double score(const BehaviorTrace& trace, int t_seconds) const override {
        return ensemble_score(*e_, trace, t_seconds);
    }

private:
    const Ensemble* e_;
};

struct TimeSliceRow {
    int t = 0;
    double accuracy = 0.0;                // 1 - (fp + fn) / total
    std::optional<double> fp_rate;        // fp / benign_count; absent without benign traces
    std::optional<double> fn_rate;        // fn / malicious_count; absent without malicious traces
    std::size_t fp_count = 0, fn_count = 0, correct_count = 0;
    std::size_t total_count = 0, benign_count = 0, malicious_count = 0;
};

struct TimeSlicedMetrics {
    std::vector<TimeSliceRow> rows;  // ascending t
};

/// Classifies every trace truncated to each t in [t_min, t_max] and tallies
/// accuracy and per-class error rates. Throws ValidationError naming samples
/// that do not cover t_max.
TimeSlicedMetrics time_sliced_eval(const TraceScorer& scorer, const LabeledDataset& test, int t_min,
                                   int t_max, double threshold = 0.5);

/// Sets the listed feature rows to exactly 0 (the standardized training
/// mean) at every timestep; all other rows are untouched bit for bit.
StdSequence mask_features(const StdSequence& seq, const std::vector<int>& off_features);
std::vector<StdSequence> mask_features(const std::vector<StdSequence>& seqs,
                                       const std::vector<int>& off_features);

/// Scoring hook over a standardized sequence, used by the ablation ops.
using SeqScorer = std::function<double(const StdSequence&)>;

struct SubsetImpact {
    std::vector<int> subset;           // masked feature indices, ascending
    double masked_pp = 0.0;            // accuracy with the subset off, percentage points
    double impact_per_feature = 0.0;   // (masked_pp - baseline_pp) / subset size
};

struct FeatureImpact {
    int feature = 0;
    double mean_impact = 0.0;  // mean over all size-k subsets containing the feature
    int subsets_counted = 0;
};

struct AblationReport {
    int t_seconds = 0;
    int subset_size = 0;
    double baseline_pp = 0.0;
    std::vector<SubsetImpact> subsets;        // all size-k subsets, lexicographic
    std::vector<FeatureImpact> per_feature;   // one row per feature
};

/// Masks every size-k subset of features off, measures the accuracy drop in
/// percentage points against the baseline, and attributes -drop/k to each
/// member of the subset. Subsets run in parallel into fixed slots. k must be
/// 1, 2 or 3.
AblationReport impact_factors(const SeqScorer& scorer, const std::vector<StdSequence>& seqs,
                              const std::vector<int>& labels, int k, double baseline_pp,
                              double threshold = 0.5);

/// Model convenience wrapper: standardizes `test` at t_seconds with the
/// model's normalizer; the baseline defaults to the unmasked accuracy.
AblationReport impact_factors(const GruNetwork& model, const LabeledDataset& test, int t_seconds, int k,
                              std::optional<double> baseline_pp = std::nullopt);

struct FeaturesOnRow {
    int subset_size = 0;
    std::vector<int> best_subset;  // features left ON, ascending
    double accuracy_pp = 0.0;
};

struct FeaturesOnReport {
    int t_seconds = 0;
    std::vector<FeaturesOnRow> rows;  // sizes 1..max_subset_size
};

/// For each subset size s, turns every size-s feature subset ON (all other
/// features masked to 0) and reports the accuracy maximiser. Ties resolve to
/// the lexicographically first subset.
FeaturesOnReport features_on_search(const SeqScorer& scorer, const std::vector<StdSequence>& seqs,
                                    const std::vector<int>& labels, int max_subset_size,
                                    double threshold = 0.5);
FeaturesOnReport features_on_search(const GruNetwork& model, const LabeledDataset& test, int t_seconds,
                                    int max_subset_size);

struct EnsembleComparisonRow {
    int t = 0;
    std::size_t best_member = 0;  // member with the highest accuracy at this t
    double best_member_accuracy = 0.0;
    double ensemble_accuracy = 0.0;
    std::optional<double> ensemble_fp_rate, ensemble_fn_rate;
    TTestResult confidence_test;  // one-sided: ensemble more confident than the best member
};

/// Per-second comparison of the max-ensemble against its best single member:
/// accuracies plus a paired one-sided t-test on per-sample prediction
/// confidences. Member accuracy ties resolve to the lower member index.
std::vector<EnsembleComparisonRow> ensemble_vs_best_member(const Ensemble& e, const LabeledDataset& test,
                                                           int t_min, int t_max, double alpha = 0.01);

struct HoldoutReport {
    GroupKey key = GroupKey::family;
    std::string value;
    std::size_t held_out_count = 0;
    int t_min = 1, t_max = 10;
    std::vector<double> detection_accuracy;  // per t, averaged over seeds
    std::vector<std::uint64_t> seeds;
};

/// Zero-day simulation: removes the whole family/variant (and the disputed
/// family) from training, trains one fresh model per seed on what remains,
/// and reports the fraction of held-out traces flagged malicious at each t.
HoldoutReport family_holdout_experiment(const LabeledDataset& dataset, GroupKey key,
                                        const std::string& value, const HyperConfig& config,
                                        const std::vector<std::uint64_t>& seeds, int t_min = 1,
                                        int t_max = 10);

}  // namespace earlyguard

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "earlyguard/gru.hpp"
#include "earlyguard/training.hpp"

namespace earlyguard {

/// Max-score combination of trained networks. The maximum biases decisions
/// toward the malicious side: one convinced member is enough to flag a
/// sample. Immutable after construction, safe for concurrent scoring.
struct Ensemble {
    std::vector<GruNetwork> members;  // at least one, all trained
    double threshold = 0.5;

    void validate() const;  // throws ValidationError
};

/// Maximum of the members' predicted probabilities.
double ensemble_score(const Ensemble& e, const BehaviorTrace& trace, int t_seconds);

/// classify(ensemble_score, threshold); the tie at the threshold is malicious.
Label ensemble_classify(const Ensemble& e, const BehaviorTrace& trace, int t_seconds);

/// Prediction confidence: 1 - |b - p| for true label b in {0,1} and score p.
/// 1 means the score sat exactly on the true label.
double confidence(int true_label01, double score);

struct TTestResult {
    double t_stat = 0.0;
    double p_value = 1.0;
    bool significant = false;
    bool degenerate = false;  // zero variance of the paired differences
};

/// Paired one-sided t-test of mean(a - b) > 0 over same-order samples.
/// significant iff p < alpha. Zero-variance differences (including a == b
/// elementwise) are reported as degenerate and never significant.
/// Throws ValidationError on length mismatch or fewer than two pairs.
TTestResult confidence_ttest(const std::vector<double>& a, const std::vector<double>& b,
                             double alpha = 0.01);

// Ensemble manifest: JSON file listing member model files, the threshold and
// per-member provenance (config digest + seeds) so a report can be replayed.
void save_ensemble_manifest(const Ensemble& e, const std::vector<std::string>& member_paths,
                            const std::filesystem::path& path);
Ensemble load_ensemble_from_manifest(const std::filesystem::path& path);

}  // namespace earlyguard

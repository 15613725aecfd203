#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "earlyguard/hyperconfig.hpp"
#include "earlyguard/rng.hpp"
#include "earlyguard/trace.hpp"

namespace earlyguard {

/// Enumerated domains of every HyperConfig field. Defaults reproduce the
/// standard table: depth 1-3, bidirectional yes/no, hidden 1-500, epochs
/// 1-500, dropout 0-0.5 in 0.1 steps, four regularisation modes for weights
/// and biases, batch sizes 32/64/128/256, plus the training snapshot time
/// 1-20 s, which is randomized alongside them.
struct SearchSpace {
    std::vector<int> depths = {1, 2, 3};
    std::vector<bool> bidirectional = {false, true};
    int hidden_min = 1, hidden_max = 500;
    int epochs_min = 1, epochs_max = 500;
    std::vector<double> dropout_rates = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<Regularizer> weight_regs = {Regularizer::none, Regularizer::l1, Regularizer::l2,
                                            Regularizer::l1_and_l2};
    std::vector<Regularizer> bias_regs = {Regularizer::none, Regularizer::l1, Regularizer::l2,
                                          Regularizer::l1_and_l2};
    std::vector<int> batch_sizes = {32, 64, 128, 256};
    int train_time_min = 1, train_time_max = 20;

    void validate() const;

    /// Product over the eight architecture/training domains (the snapshot
    /// time is a separate axis and not counted). Default space: 576,000,000.
    std::uint64_t cardinality() const;
};

nlohmann::json search_space_to_json(const SearchSpace& s);
SearchSpace search_space_from_json(const nlohmann::json& j);
SearchSpace load_search_space(const std::filesystem::path& path);

/// Each field drawn independently and uniformly from its domain.
HyperConfig sample_config(const SearchSpace& space, Rng& rng);

/// Label-stratified k-fold split; returns index lists into dataset.traces.
/// Folds partition the dataset, sizes differ by at most one, and each class
/// is spread as evenly as the counts allow. Throws ValidationError when the
/// dataset is smaller than k.
std::vector<std::vector<std::size_t>> kfold_split(const LabeledDataset& dataset, int k, std::uint64_t seed);

struct TrialResult {
    HyperConfig config;
    int draw_index = 0;                    // position in the random-search draw sequence
    std::vector<double> fold_accuracy;     // one entry per fold
    double mean_accuracy = 0.0;
    std::optional<double> mean_fp_rate;    // absent when no fold had a benign trace
    std::optional<double> mean_fn_rate;    // absent when no fold had a malicious trace
    double wall_seconds = 0.0;             // informational; kept out of report files
};

/// 10-fold style cross-validation of one configuration: per fold, fit a fresh
/// normalizer on the k-1 training folds only, train a fresh network and score
/// the held-out fold at config.train_time_seconds. Deterministic in seed.
TrialResult evaluate_config(const HyperConfig& config, const LabeledDataset& dataset, int k,
                            std::uint64_t seed);

struct TrialFailure {
    int trial_index = 0;
    HyperConfig config;
    std::string message;
};

struct SearchOutcome {
    std::vector<TrialResult> ranked;   // mean accuracy desc, then lower FN, then draw order
    std::vector<TrialFailure> failures;
};

/// Random search: `trials` configurations drawn sequentially from one seeded
/// stream, evaluated independently (in parallel when OpenMP threads are
/// available; per-trial seeds are derived from (seed, trial index), so the
/// ranked output is identical at any parallelism level). Individual trial
/// failures are recorded, not fatal, unless every trial fails.
SearchOutcome random_search(const SearchSpace& space, const LabeledDataset& dataset, int trials, int k,
                            std::uint64_t seed);

/// The early-window selection rule: for each snapshot time t = 1..t_max, take
/// the best-ranked trial trained at that t, then deduplicate by the eight
/// architecture/training fields. Mirrors picking the top configurations over
/// the first seconds of execution.
std::vector<TrialResult> select_best_early(const std::vector<TrialResult>& ranked, int t_max = 5);

}  // namespace earlyguard

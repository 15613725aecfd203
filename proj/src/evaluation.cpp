#include "earlyguard/evaluation.hpp"

#include <algorithm>

#include "earlyguard/errors.hpp"
#include "earlyguard/parallel.hpp"
#include "earlyguard/rng.hpp"
#include "earlyguard/training.hpp"

namespace earlyguard {

namespace {

void require_coverage(const LabeledDataset& test, int t_max, const char* what) {
    std::string missing;
    for (const auto& tr : test.traces)
        if (tr.snapshots.size() < static_cast<std::size_t>(t_max) + 1)
            missing += (missing.empty() ? "" : ", ") + tr.sample_id;
    if (!missing.empty())
        throw ValidationError(std::string(what) + ": traces not covering t=" + std::to_string(t_max) + ": " +
                              missing);
}

/// All size-k index subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> enumerate_subsets(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
    for (;;) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

double accuracy_pp_masked(const SeqScorer& scorer, const std::vector<StdSequence>& seqs,
                          const std::vector<int>& labels, const std::vector<int>& off, double threshold) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const StdSequence masked = mask_features(seqs[i], off);
        const Label pred = classify(scorer(masked), threshold);
        if (static_cast<int>(pred) == labels[i]) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(seqs.size());
}

struct SeqBundle {
    std::vector<StdSequence> seqs;
    std::vector<int> labels;
};

SeqBundle standardize_testset(const GruNetwork& model, const LabeledDataset& test, int t_seconds) {
    if (!model.normalizer.has_value()) throw ValidationError("ablation: model has no normalizer attached");
    require_coverage(test, t_seconds, "ablation");
    SeqBundle b;
    b.seqs.reserve(test.size());
    b.labels.reserve(test.size());
    for (const auto& tr : test.traces) {
        b.seqs.push_back(apply_normalizer_prefix(*model.normalizer, tr, t_seconds));
        b.labels.push_back(tr.label == Label::malicious ? 1 : 0);
    }
    return b;
}

SeqScorer model_seq_scorer(const GruNetwork& model) {
    return [&model](const StdSequence& s) { return gru_forward(model, s, false, 0, nullptr); };
}

}  // namespace

TimeSlicedMetrics time_sliced_eval(const TraceScorer& scorer, const LabeledDataset& test, int t_min,
                                   int t_max, double threshold) {
    if (test.traces.empty()) throw ValidationError("time_sliced_eval: empty test set");
    if (t_min > t_max) throw ValidationError("time_sliced_eval: t_min > t_max");
    require_coverage(test, t_max, "time_sliced_eval");

    TimeSlicedMetrics out;
    const auto n = test.traces.size();
    std::vector<double> scores(n);
    for (int t = t_min; t <= t_max; ++t) {
        detail::OmpExceptionGuard guard;
#pragma omp parallel for schedule(dynamic)
        for (std::size_t i = 0; i < n; ++i) {
            if (guard.skip()) continue;
            try {
                scores[i] = scorer.score(test.traces[i], t);
            } catch (...) {
                guard.capture();
            }
        }
        guard.rethrow_if_any();

        TimeSliceRow row;
        row.t = t;
        row.total_count = n;
        for (std::size_t i = 0; i < n; ++i) {
            const Label pred = classify(scores[i], threshold);
            const Label truth = test.traces[i].label;
            if (truth == Label::benign) {
                ++row.benign_count;
                if (pred == Label::malicious) ++row.fp_count; else ++row.correct_count;
            } else {
                ++row.malicious_count;
                if (pred == Label::benign) ++row.fn_count; else ++row.correct_count;
            }
        }
        row.accuracy = 1.0 - static_cast<double>(row.fp_count + row.fn_count) / static_cast<double>(n);
        if (row.benign_count > 0)
            row.fp_rate = static_cast<double>(row.fp_count) / static_cast<double>(row.benign_count);
        if (row.malicious_count > 0)
            row.fn_rate = static_cast<double>(row.fn_count) / static_cast<double>(row.malicious_count);
        out.rows.push_back(row);
    }
    return out;
}

StdSequence mask_features(const StdSequence& seq, const std::vector<int>& off_features) {
    for (const int f : off_features)
        if (f < 0 || f >= kNumFeatures)
            throw ValidationError("mask_features: feature index " + std::to_string(f) + " outside [0," +
                                  std::to_string(kNumFeatures) + ")");
    StdSequence out = seq;
    for (const int f : off_features) out.row(f).setZero();
    return out;
}

std::vector<StdSequence> mask_features(const std::vector<StdSequence>& seqs,
                                       const std::vector<int>& off_features) {
    std::vector<StdSequence> out;
    out.reserve(seqs.size());
    for (const auto& s : seqs) out.push_back(mask_features(s, off_features));
    return out;
}

AblationReport impact_factors(const SeqScorer& scorer, const std::vector<StdSequence>& seqs,
                              const std::vector<int>& labels, int k, double baseline_pp,
                              double threshold) {
    if (k < 1 || k > 3) throw ValidationError("impact_factors: subset size must be 1, 2 or 3");
    if (seqs.empty() || seqs.size() != labels.size())
        throw ValidationError("impact_factors: bad sequence/label lists");

    const auto subsets = enumerate_subsets(kNumFeatures, k);
    std::vector<double> masked_pp(subsets.size(), 0.0);
    detail::OmpExceptionGuard guard;

#pragma omp parallel for schedule(dynamic)
    for (std::size_t si = 0; si < subsets.size(); ++si) {
        if (guard.skip()) continue;
        try {
            masked_pp[si] = accuracy_pp_masked(scorer, seqs, labels, subsets[si], threshold);
        } catch (...) {
            guard.capture();
        }
    }
    guard.rethrow_if_any();

    AblationReport rep;
    rep.subset_size = k;
    rep.baseline_pp = baseline_pp;
    double feature_sum[kNumFeatures] = {};
    int feature_n[kNumFeatures] = {};
    for (std::size_t si = 0; si < subsets.size(); ++si) {
        SubsetImpact imp;
        imp.subset = subsets[si];
        imp.masked_pp = masked_pp[si];
        imp.impact_per_feature = (masked_pp[si] - baseline_pp) / static_cast<double>(k);
        for (const int f : imp.subset) {
            feature_sum[f] += imp.impact_per_feature;
            ++feature_n[f];
        }
        rep.subsets.push_back(std::move(imp));
    }
    for (int f = 0; f < kNumFeatures; ++f)
        rep.per_feature.push_back(
            {f, feature_n[f] > 0 ? feature_sum[f] / feature_n[f] : 0.0, feature_n[f]});
    return rep;
}

AblationReport impact_factors(const GruNetwork& model, const LabeledDataset& test, int t_seconds, int k,
                              std::optional<double> baseline_pp) {
    const SeqBundle b = standardize_testset(model, test, t_seconds);
    const SeqScorer scorer = model_seq_scorer(model);
    const double base = baseline_pp ? *baseline_pp : accuracy_pp_masked(scorer, b.seqs, b.labels, {}, 0.5);
    AblationReport rep = impact_factors(scorer, b.seqs, b.labels, k, base);
    rep.t_seconds = t_seconds;
    return rep;
}

FeaturesOnReport features_on_search(const SeqScorer& scorer, const std::vector<StdSequence>& seqs,
                                    const std::vector<int>& labels, int max_subset_size,
                                    double threshold) {
    if (max_subset_size < 1 || max_subset_size > kNumFeatures)
        throw ValidationError("features_on_search: subset size must be in [1," +
                              std::to_string(kNumFeatures) + "]");
    if (seqs.empty() || seqs.size() != labels.size())
        throw ValidationError("features_on_search: bad sequence/label lists");

    FeaturesOnReport rep;
    for (int s = 1; s <= max_subset_size; ++s) {
        const auto on_subsets = enumerate_subsets(kNumFeatures, s);
        std::vector<double> acc(on_subsets.size(), 0.0);
        detail::OmpExceptionGuard guard;

#pragma omp parallel for schedule(dynamic)
        for (std::size_t si = 0; si < on_subsets.size(); ++si) {
            if (guard.skip()) continue;
            try {
                // Mask the complement: only the subset stays on.
                std::vector<int> off;
                for (int f = 0; f < kNumFeatures; ++f)
                    if (std::find(on_subsets[si].begin(), on_subsets[si].end(), f) == on_subsets[si].end())
                        off.push_back(f);
                acc[si] = accuracy_pp_masked(scorer, seqs, labels, off, threshold);
            } catch (...) {
                guard.capture();
            }
        }
        guard.rethrow_if_any();

        std::size_t best = 0;
        for (std::size_t si = 1; si < on_subsets.size(); ++si)
            if (acc[si] > acc[best]) best = si;  // strict: ties keep the lexicographically first
        rep.rows.push_back({s, on_subsets[best], acc[best]});
    }
    return rep;
}

FeaturesOnReport features_on_search(const GruNetwork& model, const LabeledDataset& test, int t_seconds,
                                    int max_subset_size) {
    const SeqBundle b = standardize_testset(model, test, t_seconds);
    FeaturesOnReport rep = features_on_search(model_seq_scorer(model), b.seqs, b.labels, max_subset_size);
    rep.t_seconds = t_seconds;
    return rep;
}

std::vector<EnsembleComparisonRow> ensemble_vs_best_member(const Ensemble& e, const LabeledDataset& test,
                                                           int t_min, int t_max, double alpha) {
    e.validate();
    if (test.traces.empty()) throw ValidationError("ensemble comparison: empty test set");
    require_coverage(test, t_max, "ensemble comparison");

    const auto n = test.traces.size();
    const auto m = e.members.size();
    std::vector<EnsembleComparisonRow> rows;

    std::vector<std::vector<double>> member_scores(m, std::vector<double>(n));
    for (int t = t_min; t <= t_max; ++t) {
        detail::OmpExceptionGuard guard;
#pragma omp parallel for schedule(dynamic)
        for (std::size_t i = 0; i < n; ++i) {
            if (guard.skip()) continue;
            try {
                for (std::size_t j = 0; j < m; ++j)
                    member_scores[j][i] = predict_proba(e.members[j], test.traces[i], t);
            } catch (...) {
                guard.capture();
            }
        }
        guard.rethrow_if_any();

        EnsembleComparisonRow row;
        row.t = t;

        std::vector<double> member_acc(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t correct = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const Label pred = classify(member_scores[j][i], e.threshold);
                if (pred == test.traces[i].label) ++correct;
            }
            member_acc[j] = static_cast<double>(correct) / static_cast<double>(n);
            if (j == 0 || member_acc[j] > member_acc[row.best_member]) row.best_member = j;
        }
        row.best_member_accuracy = member_acc[row.best_member];

        std::size_t correct = 0, fp = 0, fn = 0, benign = 0, malicious = 0;
        std::vector<double> conf_ensemble(n), conf_best(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = member_scores[0][i];
            for (std::size_t j = 1; j < m; ++j) s = std::max(s, member_scores[j][i]);
            const int truth = test.traces[i].label == Label::malicious ? 1 : 0;
            conf_ensemble[i] = confidence(truth, s);
            conf_best[i] = confidence(truth, member_scores[row.best_member][i]);
            const Label pred = classify(s, e.threshold);
            if (truth == 1) {
                ++malicious;
                if (pred == Label::benign) ++fn; else ++correct;
            } else {
                ++benign;
                if (pred == Label::malicious) ++fp; else ++correct;
            }
        }
        row.ensemble_accuracy = static_cast<double>(correct) / static_cast<double>(n);
        if (benign > 0) row.ensemble_fp_rate = static_cast<double>(fp) / static_cast<double>(benign);
        if (malicious > 0) row.ensemble_fn_rate = static_cast<double>(fn) / static_cast<double>(malicious);
        row.confidence_test = confidence_ttest(conf_ensemble, conf_best, alpha);
        rows.push_back(std::move(row));
    }
    return rows;
}

HoldoutReport family_holdout_experiment(const LabeledDataset& dataset, GroupKey key,
                                        const std::string& value, const HyperConfig& config,
                                        const std::vector<std::uint64_t>& seeds, int t_min, int t_max) {
    if (seeds.empty()) throw ValidationError("holdout experiment: at least one seed required");
    if (t_min < 1 || t_min > t_max) throw ValidationError("holdout experiment: bad t range");
    auto [train_side, held_out] = holdout_group(dataset, key, value, true);
    require_coverage(held_out, t_max, "holdout experiment");

    HoldoutReport rep;
    rep.key = key;
    rep.value = value;
    rep.held_out_count = held_out.size();
    rep.t_min = t_min;
    rep.t_max = t_max;
    rep.seeds = seeds;
    rep.detection_accuracy.assign(static_cast<std::size_t>(t_max - t_min + 1), 0.0);

    for (const auto seed : seeds) {
        const Normalizer norm = fit_normalizer(train_side);
        GruNetwork net = init_params(config, derive_seed(seed, 0x686f6c64ULL));
        train(net, train_side, norm, derive_seed(seed, 0x74726eULL));
        for (int t = t_min; t <= t_max; ++t) {
            std::size_t detected = 0;
            for (const auto& tr : held_out.traces)
                if (classify(predict_proba(net, tr, t)) == Label::malicious) ++detected;
            rep.detection_accuracy[static_cast<std::size_t>(t - t_min)] +=
                static_cast<double>(detected) / static_cast<double>(held_out.size());
        }
    }
    for (auto& a : rep.detection_accuracy) a /= static_cast<double>(seeds.size());
    return rep;
}

}  // namespace earlyguard

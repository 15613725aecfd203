#pragma once

#include <filesystem>

#include "earlyguard/evaluation.hpp"
#include "earlyguard/search.hpp"

namespace earlyguard {

enum class ReportFormat { csv, json };

ReportFormat parse_report_format(std::string_view s);  // "csv" | "json"

// All emitters produce stable field ordering and shortest round-trip number
// formatting, so a fixed input yields a byte-identical file. Timing fields
// are deliberately left out of report files; they live in the run manifest.

// Time-sliced metrics: long format, one row per (t, metric).
// CSV header: t,metric,value. Metrics: accuracy, fp_rate, fn_rate (rate rows
// omitted when the class is absent), fp_count, fn_count, correct_count,
// total_count, benign_count, malicious_count.
void emit_report(const TimeSlicedMetrics& m, const std::filesystem::path& path, ReportFormat fmt);
TimeSlicedMetrics parse_time_sliced_csv(const std::filesystem::path& path);

// Holdout report. CSV header: t,detection_accuracy.
void emit_report(const HoldoutReport& r, const std::filesystem::path& path, ReportFormat fmt);

// Ablation impact factors. CSV header: record,k,subset,feature,value with
// record in {baseline_pp, subset_accuracy_pp, subset_impact, feature_impact};
// subsets rendered as '+'-joined ascending indices.
void emit_report(const AblationReport& r, const std::filesystem::path& path, ReportFormat fmt);

// Feature-on search. CSV header: subset_size,best_subset,accuracy_pp.
void emit_report(const FeaturesOnReport& r, const std::filesystem::path& path, ReportFormat fmt);

// Ensemble vs best single member, one row per second. CSV header:
// t,best_member,best_member_accuracy,ensemble_accuracy,ensemble_fp_rate,
// ensemble_fn_rate,t_stat,p_value,significant,degenerate.
void emit_ensemble_comparison(const std::vector<EnsembleComparisonRow>& rows,
                              const std::filesystem::path& path, ReportFormat fmt);

// Random-search trials, ranked. CSV columns: rank, draw_index, mean_accuracy,
// mean_fp_rate, mean_fn_rate (blank when undefined), the config fields, and
// ';'-joined fold accuracies.
void emit_trials_csv(const SearchOutcome& outcome, const std::filesystem::path& path);
void emit_search_failures_csv(const SearchOutcome& outcome, const std::filesystem::path& path);

// Winning early-window configurations as a JSON list.
void emit_best_configs_json(const std::vector<TrialResult>& best, const std::filesystem::path& path);

}  // namespace earlyguard

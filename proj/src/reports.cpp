#include "earlyguard/reports.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "earlyguard/errors.hpp"
#include "earlyguard/fmt_util.hpp"

namespace earlyguard {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write report file '" + path.string() + "'");
    return out;
}

std::string join_subset(const std::vector<int>& subset) {
    std::string s;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (i) s += '+';
        s += std::to_string(subset[i]);
    }
    return s;
}

nlohmann::json time_sliced_to_json(const TimeSlicedMetrics& m) {
    auto rows = nlohmann::json::array();
    for (const auto& r : m.rows) {
        const auto add = [&](const char* metric, double value) {
            rows.push_back({{"t", r.t}, {"metric", metric}, {"value", value}});
        };
        add("accuracy", r.accuracy);
        if (r.fp_rate) add("fp_rate", *r.fp_rate);
        if (r.fn_rate) add("fn_rate", *r.fn_rate);
        add("fp_count", static_cast<double>(r.fp_count));
        add("fn_count", static_cast<double>(r.fn_count));
        add("correct_count", static_cast<double>(r.correct_count));
        add("total_count", static_cast<double>(r.total_count));
        add("benign_count", static_cast<double>(r.benign_count));
        add("malicious_count", static_cast<double>(r.malicious_count));
    }
    return rows;
}

}  // namespace

ReportFormat parse_report_format(std::string_view s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw ValidationError("unknown report format '" + std::string(s) + "' (expected csv|json)");
}

void emit_report(const TimeSlicedMetrics& m, const std::filesystem::path& path, ReportFormat fmt) {
    auto out = open_out(path);
    if (fmt == ReportFormat::json) {
        out << time_sliced_to_json(m).dump(2) << '\n';
        return;
    }
    out << "t,metric,value\n";
    for (const auto& r : m.rows) {
        const auto add = [&](const char* metric, double value) {
            out << r.t << ',' << metric << ',' << format_double(value) << '\n';
        };
        add("accuracy", r.accuracy);
        if (r.fp_rate) add("fp_rate", *r.fp_rate);
        if (r.fn_rate) add("fn_rate", *r.fn_rate);
        add("fp_count", static_cast<double>(r.fp_count));
        add("fn_count", static_cast<double>(r.fn_count));
        add("correct_count", static_cast<double>(r.correct_count));
        add("total_count", static_cast<double>(r.total_count));
        add("benign_count", static_cast<double>(r.benign_count));
        add("malicious_count", static_cast<double>(r.malicious_count));
    }
}

TimeSlicedMetrics parse_time_sliced_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open report file '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != "t,metric,value")
        throw ValidationError("'" + path.string() + "' is not a time-sliced metrics CSV");

    TimeSlicedMetrics m;
    TimeSliceRow* row = nullptr;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string t_str, metric, value_str;
        if (!std::getline(ls, t_str, ',') || !std::getline(ls, metric, ',') || !std::getline(ls, value_str))
            throw ValidationError("'" + path.string() + "': malformed row '" + line + "'");
        const int t = std::stoi(t_str);
        double value = 0.0;
        const auto res = std::from_chars(value_str.data(), value_str.data() + value_str.size(), value);
        if (res.ec != std::errc{})
            throw ValidationError("'" + path.string() + "': bad value '" + value_str + "'");
        if (row == nullptr || row->t != t) {
            m.rows.push_back(TimeSliceRow{});
            row = &m.rows.back();
            row->t = t;
        }
        if (metric == "accuracy") row->accuracy = value;
        else if (metric == "fp_rate") row->fp_rate = value;
        else if (metric == "fn_rate") row->fn_rate = value;
        else if (metric == "fp_count") row->fp_count = static_cast<std::size_t>(value);
        else if (metric == "fn_count") row->fn_count = static_cast<std::size_t>(value);
        else if (metric == "correct_count") row->correct_count = static_cast<std::size_t>(value);
        else if (metric == "total_count") row->total_count = static_cast<std::size_t>(value);
        else if (metric == "benign_count") row->benign_count = static_cast<std::size_t>(value);
        else if (metric == "malicious_count") row->malicious_count = static_cast<std::size_t>(value);
        else throw ValidationError("'" + path.string() + "': unknown metric '" + metric + "'");
    }
    return m;
}

void emit_report(const HoldoutReport& r, const std::filesystem::path& path, ReportFormat fmt) {
    auto out = open_out(path);
    if (fmt == ReportFormat::json) {
        nlohmann::json j{{"key", std::string(group_key_name(r.key))},
                         {"value", r.value},
                         {"held_out_count", r.held_out_count},
                         {"seeds", r.seeds}};
        auto rows = nlohmann::json::array();
        for (std::size_t i = 0; i < r.detection_accuracy.size(); ++i)
            rows.push_back({{"t", r.t_min + static_cast<int>(i)}, {"detection_accuracy", r.detection_accuracy[i]}});
        j["rows"] = std::move(rows);
        out << j.dump(2) << '\n';
        return;
    }
    out << "t,detection_accuracy\n";
    for (std::size_t i = 0; i < r.detection_accuracy.size(); ++i)
        out << (r.t_min + static_cast<int>(i)) << ',' << format_double(r.detection_accuracy[i]) << '\n';
}

void emit_report(const AblationReport& r, const std::filesystem::path& path, ReportFormat fmt) {
    auto out = open_out(path);
    if (fmt == ReportFormat::json) {
        nlohmann::json j{{"t_seconds", r.t_seconds}, {"subset_size", r.subset_size}, {"baseline_pp", r.baseline_pp}};
        auto subsets = nlohmann::json::array();
        for (const auto& s : r.subsets)
            subsets.push_back({{"subset", s.subset},
                               {"masked_accuracy_pp", s.masked_pp},
                               {"impact_per_feature", s.impact_per_feature}});
        auto features = nlohmann::json::array();
        for (const auto& f : r.per_feature)
            features.push_back({{"feature", f.feature},
                                {"name", std::string(kFeatureNames[static_cast<std::size_t>(f.feature)])},
                                {"mean_impact", f.mean_impact},
                                {"subsets_counted", f.subsets_counted}});
        j["subsets"] = std::move(subsets);
        j["per_feature"] = std::move(features);
        out << j.dump(2) << '\n';
        return;
    }
    out << "record,k,subset,feature,value\n";
    out << "baseline_pp," << r.subset_size << ",,," << format_double(r.baseline_pp) << '\n';
    for (const auto& s : r.subsets) {
        out << "subset_accuracy_pp," << r.subset_size << ',' << join_subset(s.subset) << ",,"
            << format_double(s.masked_pp) << '\n';
        out << "subset_impact," << r.subset_size << ',' << join_subset(s.subset) << ",,"
            << format_double(s.impact_per_feature) << '\n';
    }
    for (const auto& f : r.per_feature)
        out << "feature_impact," << r.subset_size << ",," << f.feature << ',' << format_double(f.mean_impact)
            << '\n';
}

void emit_report(const FeaturesOnReport& r, const std::filesystem::path& path, ReportFormat fmt) {
    auto out = open_out(path);
    if (fmt == ReportFormat::json) {
        nlohmann::json j{{"t_seconds", r.t_seconds}};
        auto rows = nlohmann::json::array();
        for (const auto& row : r.rows)
            rows.push_back(
                {{"subset_size", row.subset_size}, {"best_subset", row.best_subset}, {"accuracy_pp", row.accuracy_pp}});
        j["rows"] = std::move(rows);
        out << j.dump(2) << '\n';
        return;
    }
    out << "subset_size,best_subset,accuracy_pp\n";
    for (const auto& row : r.rows)
        out << row.subset_size << ',' << join_subset(row.best_subset) << ',' << format_double(row.accuracy_pp)
            << '\n';
}

void emit_ensemble_comparison(const std::vector<EnsembleComparisonRow>& rows,
                              const std::filesystem::path& path, ReportFormat fmt) {
    auto out = open_out(path);
    if (fmt == ReportFormat::json) {
        auto arr = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json j{{"t", r.t},
                             {"best_member", r.best_member},
                             {"best_member_accuracy", r.best_member_accuracy},
                             {"ensemble_accuracy", r.ensemble_accuracy},
                             {"t_stat", r.confidence_test.t_stat},
                             {"p_value", r.confidence_test.p_value},
                             {"significant", r.confidence_test.significant},
                             {"degenerate", r.confidence_test.degenerate}};
            if (r.ensemble_fp_rate) j["ensemble_fp_rate"] = *r.ensemble_fp_rate;
            if (r.ensemble_fn_rate) j["ensemble_fn_rate"] = *r.ensemble_fn_rate;
            arr.push_back(std::move(j));
        }
        out << arr.dump(2) << '\n';
        return;
    }
    out << "t,best_member,best_member_accuracy,ensemble_accuracy,ensemble_fp_rate,ensemble_fn_rate,"
           "t_stat,p_value,significant,degenerate\n";
    for (const auto& r : rows) {
        out << r.t << ',' << r.best_member << ',' << format_double(r.best_member_accuracy) << ','
            << format_double(r.ensemble_accuracy) << ','
            << (r.ensemble_fp_rate ? format_double(*r.ensemble_fp_rate) : "") << ','
            << (r.ensemble_fn_rate ? format_double(*r.ensemble_fn_rate) : "") << ','
            << format_double(r.confidence_test.t_stat) << ',' << format_double(r.confidence_test.p_value)
            << ',' << (r.confidence_test.significant ? "true" : "false") << ','
            << (r.confidence_test.degenerate ? "true" : "false") << '\n';
    }
}

void emit_trials_csv(const SearchOutcome& outcome, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "rank,draw_index,mean_accuracy,mean_fp_rate,mean_fn_rate,depth,bidirectional,hidden_neurons,"
           "epochs,dropout_rate,weight_regularisation,bias_regularisation,batch_size,train_time_seconds,"
           "fold_accuracies\n";
    for (std::size_t rank = 0; rank < outcome.ranked.size(); ++rank) {
        const auto& r = outcome.ranked[rank];
        const auto& c = r.config;
        out << rank + 1 << ',' << r.draw_index << ',' << format_double(r.mean_accuracy) << ','
            << (r.mean_fp_rate ? format_double(*r.mean_fp_rate) : "") << ','
            << (r.mean_fn_rate ? format_double(*r.mean_fn_rate) : "") << ',' << c.depth << ','
            << (c.bidirectional ? "true" : "false") << ',' << c.hidden_neurons << ',' << c.epochs << ','
            << format_double(c.dropout_rate) << ',' << regularizer_name(c.weight_reg) << ','
            << regularizer_name(c.bias_reg) << ',' << c.batch_size << ',' << c.train_time_seconds << ',';
        for (std::size_t i = 0; i < r.fold_accuracy.size(); ++i) {
            if (i) out << ';';
            out << format_double(r.fold_accuracy[i]);
        }
        out << '\n';
    }
}

void emit_search_failures_csv(const SearchOutcome& outcome, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "trial_index,message\n";
    for (const auto& f : outcome.failures) {
        std::string msg = f.message;
        for (auto& ch : msg)
            if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
        out << f.trial_index << ',' << msg << '\n';
    }
}

void emit_best_configs_json(const std::vector<TrialResult>& best, const std::filesystem::path& path) {
    auto out = open_out(path);
    auto arr = nlohmann::json::array();
    for (const auto& r : best)
        arr.push_back({{"config", hyperconfig_to_json(r.config)},
                       {"mean_accuracy", r.mean_accuracy},
                       {"draw_index", r.draw_index}});
    out << arr.dump(2) << '\n';
}

}  // namespace earlyguard

// earlyguard: batch CLI for early-stage behavioral malware prediction
// experiments. Subcommands wrap the library's experiment protocols into
// reproducible seeded runs; every run drops a manifest next to its outputs.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "earlyguard/baselines.hpp"
#include "earlyguard/ensemble.hpp"
#include "earlyguard/errors.hpp"
#include "earlyguard/evaluation.hpp"
#include "earlyguard/gru.hpp"
#include "earlyguard/hyperconfig.hpp"
#include "earlyguard/log.hpp"
#include "earlyguard/manifest.hpp"
#include "earlyguard/model_io.hpp"
#include "earlyguard/reports.hpp"
#include "earlyguard/search.hpp"
#include "earlyguard/synth.hpp"
#include "earlyguard/time_util.hpp"
#include "earlyguard/trace_csv.hpp"
#include "earlyguard/training.hpp"

namespace fs = std::filesystem;
using namespace earlyguard;

namespace {

std::string now_utc() { return format_iso8601_utc(static_cast<std::int64_t>(std::time(nullptr))); }

/// Collects inputs/outputs for the manifest while a command runs.
struct Run {
    RunManifest manifest;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    Run(std::string command, int argc, char** argv, std::uint64_t seed, int jobs) {
        manifest.command = std::move(command);
        for (int i = 0; i < argc; ++i) manifest.argv.emplace_back(argv[i]);
        manifest.seed = seed;
        manifest.jobs = jobs;
        manifest.started_utc = now_utc();
    }

    void input(const fs::path& p) { manifest.input_digests.emplace_back(p.string(), file_digest(p)); }
    void output(const fs::path& p) { manifest.output_digests.emplace_back(p.string(), file_digest(p)); }

    void finish(const fs::path& manifest_path) {
        manifest.finished_utc = now_utc();
        manifest.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(manifest, manifest_path);
    }
};

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FileError("cannot create output directory '" + out + "': " + ec.message());
    return dir;
}

HyperConfig config_from_arg(const std::string& arg) {
    if (arg.rfind("preset:", 0) == 0) return preset_config(arg.substr(7));
    return load_hyperconfig(arg);
}

LabeledDataset load_side(const fs::path& path, const std::string& cutoff, bool train_side) {
    LabeledDataset d = load_traces(path);
    validate_unique_ids(d);
    if (cutoff.empty()) return d;
    auto [train, test] = split_by_date(d.traces, parse_iso8601_utc(cutoff));
    return train_side ? std::move(train) : std::move(test);
}

void emit_formats(const TimeSlicedMetrics& m, const fs::path& base_no_ext, const std::string& format,
                  Run& run) {
    if (format == "csv" || format == "both") {
        const fs::path p = base_no_ext.string() + ".csv";
        emit_report(m, p, ReportFormat::csv);
        run.output(p);
    }
    if (format == "json" || format == "both") {
        const fs::path p = base_no_ext.string() + ".json";
        emit_report(m, p, ReportFormat::json);
        run.output(p);
    }
}

// ---- subcommand bodies ----

int run_synth(int argc, char** argv, std::uint64_t seed, int jobs, int benign, int malicious,
              int snapshots, double late_fraction, const std::string& out) {
    Run run("synth", argc, argv, seed, jobs);
    GeneratorSpec spec;
    spec.snapshots_per_trace = snapshots;
    spec.late_fraction = late_fraction;
    const LabeledDataset d = synth_generate(spec, benign, malicious, seed);
    const fs::path out_path(out);
    if (out_path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(out_path.parent_path(), ec);
    }
    save_traces(d, out_path);
    run.output(out_path);
    run.finish(out_path.string() + ".manifest.json");
    return 0;
}

int run_search(int argc, char** argv, std::uint64_t seed, int jobs, const std::string& data,
               const std::string& space_file, int trials, int k_folds, const std::string& out) {
    Run run("search", argc, argv, seed, jobs);
    const fs::path dir = ensure_out_dir(out);
    run.input(data);
    SearchSpace space;
    if (!space_file.empty()) {
        run.input(space_file);
        space = load_search_space(space_file);
    }
    const LabeledDataset d = load_traces(data);
    validate_unique_ids(d);

    const SearchOutcome outcome = random_search(space, d, trials, k_folds, seed);
    emit_trials_csv(outcome, dir / "trials.csv");
    run.output(dir / "trials.csv");
    emit_best_configs_json(select_best_early(outcome.ranked), dir / "best_configs.json");
    run.output(dir / "best_configs.json");
    if (!outcome.failures.empty()) {
        emit_search_failures_csv(outcome, dir / "failures.csv");
        run.output(dir / "failures.csv");
    }
    run.finish(dir / "manifest.json");
    return 0;
}

int run_train(int argc, char** argv, std::uint64_t seed, int jobs, const std::string& config_arg,
              const std::string& data, const std::string& cutoff, const std::string& out) {
    Run run("train", argc, argv, seed, jobs);
    const fs::path dir = ensure_out_dir(out);
    const HyperConfig config = config_from_arg(config_arg);
    if (config_arg.rfind("preset:", 0) != 0) run.input(config_arg);
    run.input(data);

    const LabeledDataset train_set = load_side(data, cutoff, true);
    const Normalizer norm = fit_normalizer(train_set);
    GruNetwork net = init_params(config, derive_seed(seed, 0x6d6f64656cULL));
    const TrainRecord rec = train(net, train_set, norm, derive_seed(seed, 0x747261696eULL));
    log::info("trained %lld parameters, %d epochs, final mean loss %.6f",
              static_cast<long long>(net.parameter_count()), rec.epochs_run,
              rec.epoch_mean_loss.empty() ? 0.0 : rec.epoch_mean_loss.back());

    save_model(net, dir / "model.egm");
    run.output(dir / "model.egm");
    run.finish(dir / "manifest.json");
    return 0;
}

int run_eval(int argc, char** argv, std::uint64_t seed, int jobs, const std::string& model_path,
             const std::string& ensemble_path, const std::string& baseline_kind,
             const std::string& test_path, const std::string& train_data, const std::string& cutoff,
             int t_min, int t_max, const std::string& format, const std::string& out) {
    Run run("eval", argc, argv, seed, jobs);
    const fs::path dir = ensure_out_dir(out);
    const int sources = (model_path.empty() ? 0 : 1) + (ensemble_path.empty() ? 0 : 1) +
                        (baseline_kind.empty() ? 0 : 1);
    if (sources != 1)
        throw ValidationError("eval needs exactly one of --model, --ensemble-manifest, --baseline");
    run.input(test_path);
    const LabeledDataset test = load_side(test_path, cutoff, false);

    if (!baseline_kind.empty()) {
        const BaselineKind kind = parse_baseline_kind(baseline_kind);
        LabeledDataset train_set;
        if (!train_data.empty()) {
            run.input(train_data);
            train_set = load_side(train_data, cutoff, true);
        } else if (!cutoff.empty()) {
            train_set = load_side(test_path, cutoff, true);
        } else {
            throw ValidationError("baseline eval needs --train-data or --cutoff to form a training set");
        }
        // A baseline is retrained per snapshot time on the flattened prefix,
        // then pushed through the same time-sliced harness as the networks.
        TimeSlicedMetrics merged;
        if (t_min < 0 || t_min > t_max) throw ValidationError("eval: bad t range");
        for (int t = t_min; t <= t_max; ++t) {
            const BaselineModel bm =
                train_baseline(kind, train_set, t, derive_seed(seed, static_cast<std::uint64_t>(t)));
            const BaselineScorer scorer(bm);
            const TimeSlicedMetrics one = time_sliced_eval(scorer, test, t, t);
            merged.rows.push_back(one.rows.front());
        }
        emit_formats(merged, dir / "metrics", format, run);
    } else if (!model_path.empty()) {
        run.input(model_path);
        const GruNetwork net = load_model(model_path);
        if (t_min < 1) throw ValidationError("eval: recurrent models need --t-min >= 1");
        const GruScorer scorer(net);
        emit_formats(time_sliced_eval(scorer, test, t_min, t_max), dir / "metrics", format, run);
    } else {
        run.input(ensemble_path);
        const Ensemble e = load_ensemble_from_manifest(ensemble_path);
        if (t_min < 1) throw ValidationError("eval: ensembles need --t-min >= 1");
        const EnsembleScorer scorer(e);
        emit_formats(time_sliced_eval(scorer, test, t_min, t_max), dir / "metrics", format, run);
    }
    run.finish(dir / "manifest.json");
    return 0;
}

int run_holdout(int argc, char** argv, std::uint64_t seed, int jobs, const std::string& data,
                const std::string& key, const std::string& value, const std::string& config_arg,
                int replicates, int t_min, int t_max, const std::string& format,
                const std::string& out) {
    Run run("holdout", argc, argv, seed, jobs);
    const fs::path dir = ensure_out_dir(out);
    run.input(data);
    const HyperConfig config = config_from_arg(config_arg);
    if (config_arg.rfind("preset:", 0) != 0) run.input(config_arg);
    const LabeledDataset d = load_traces(data);
    validate_unique_ids(d);

    if (replicates < 1) throw ValidationError("holdout: --replicates must be >= 1");
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < replicates; ++r) seeds.push_back(derive_seed(seed, static_cast<std::uint64_t>(r)));

    const HoldoutReport rep =
        family_holdout_experiment(d, parse_group_key(key), value, config, seeds, t_min, t_max);
    if (format == "csv" || format == "both") {
        emit_report(rep, dir / "holdout.csv", ReportFormat::csv);
        run.output(dir / "holdout.csv");
    }
    if (format == "json" || format == "both") {
        emit_report(rep, dir / "holdout.json", ReportFormat::json);
        run.output(dir / "holdout.json");
    }
    run.finish(dir / "manifest.json");
    return 0;
}

int run_ablate(int argc, char** argv, std::uint64_t seed, int jobs, const std::string& model_path,
               const std::string& test_path, const std::string& cutoff, int at_time, int subset_size,
               int features_on, const std::string& format, const std::string& out) {
    Run run("ablate", argc, argv, seed, jobs);
    const fs::path dir = ensure_out_dir(out);
    run.input(model_path);
    run.input(test_path);
    const GruNetwork net = load_model(model_path);
    const LabeledDataset test = load_side(test_path, cutoff, false);

    for (int k = 1; k <= subset_size; ++k) {
        const AblationReport rep = impact_factors(net, test, at_time, k);
        const std::string base = "impact_k" + std::to_string(k);
        if (format == "csv" || format == "both") {
            emit_report(rep, dir / (base + ".csv"), ReportFormat::csv);
            run.output(dir / (base + ".csv"));
        }
        if (format == "json" || format == "both") {
            emit_report(rep, dir / (base + ".json"), ReportFormat::json);
            run.output(dir / (base + ".json"));
        }
    }
    if (features_on > 0) {
        const FeaturesOnReport rep = features_on_search(net, test, at_time, features_on);
        if (format == "csv" || format == "both") {
            emit_report(rep, dir / "features_on.csv", ReportFormat::csv);
            run.output(dir / "features_on.csv");
        }
        if (format == "json" || format == "both") {
            emit_report(rep, dir / "features_on.json", ReportFormat::json);
            run.output(dir / "features_on.json");
        }
    }
    run.finish(dir / "manifest.json");
    return 0;
}

int run_ensemble(int argc, char** argv, std::uint64_t seed, int jobs,
                 const std::vector<std::string>& model_paths, const std::string& test_path,
                 const std::string& cutoff, int t_min, int t_max, double alpha,
                 const std::string& format, const std::string& out) {
    Run run("ensemble", argc, argv, seed, jobs);
    const fs::path dir = ensure_out_dir(out);
    if (model_paths.empty()) throw ValidationError("ensemble: at least one --models entry required");

    Ensemble e;
    for (const auto& p : model_paths) {
        run.input(p);
        e.members.push_back(load_model(p));
    }
    e.validate();
    save_ensemble_manifest(e, model_paths, dir / "ensemble_manifest.json");
    run.output(dir / "ensemble_manifest.json");

    if (!test_path.empty()) {
        run.input(test_path);
        const LabeledDataset test = load_side(test_path, cutoff, false);
        const EnsembleScorer scorer(e);
        emit_formats(time_sliced_eval(scorer, test, t_min, t_max), dir / "metrics", format, run);
        const auto rows = ensemble_vs_best_member(e, test, t_min, t_max, alpha);
        if (format == "csv" || format == "both") {
            emit_ensemble_comparison(rows, dir / "comparison.csv", ReportFormat::csv);
            run.output(dir / "comparison.csv");
        }
        if (format == "json" || format == "both") {
            emit_ensemble_comparison(rows, dir / "comparison.json", ReportFormat::json);
            run.output(dir / "comparison.json");
        }
    }
    run.finish(dir / "manifest.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"early-stage behavioral malware prediction experiments"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    int jobs = 0;
    app.add_option("--seed", seed, "master seed; every run is deterministic given it")->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads (0 = library default); results do not depend on it")
        ->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled trace dataset");
    int benign = 100, malicious = 100, snapshots = 21;
    double late_fraction = 0.3;
    std::string synth_out;
    synth->add_option("--benign", benign, "benign trace count")->capture_default_str();
    synth->add_option("--malicious", malicious, "malicious trace count")->capture_default_str();
    synth->add_option("--snapshots", snapshots, "snapshots per trace")->capture_default_str();
    synth->add_option("--late-fraction", late_fraction, "share of late-payload malicious traces")
        ->capture_default_str();
    synth->add_option("-o,--out", synth_out, "output CSV path")->required();

    // search
    auto* search = app.add_subcommand("search", "random hyperparameter search with k-fold CV");
    std::string search_data, space_file, search_out;
    int trials = 60, k_folds = 10;
    search->add_option("--data", search_data, "training dataset CSV")->required();
    search->add_option("--space", space_file, "search-space JSON (defaults to the full space)");
    search->add_option("--trials", trials, "number of sampled configurations")->capture_default_str();
    search->add_option("--k-folds", k_folds, "cross-validation folds")->capture_default_str();
    search->add_option("-o,--out", search_out, "output directory")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train one network on a dataset");
    std::string train_config, train_data, train_cutoff, train_out;
    train_cmd->add_option("--config", train_config, "config JSON path or preset:{A,B,C}")->required();
    train_cmd->add_option("--data", train_data, "dataset CSV")->required();
    train_cmd->add_option("--cutoff", train_cutoff,
                          "ISO-8601 UTC date split; only traces first seen before it are used");
    train_cmd->add_option("-o,--out", train_out, "output directory")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "time-sliced evaluation of a model, ensemble or baseline");
    std::string eval_model, eval_ensemble, eval_baseline, eval_test, eval_train_data, eval_cutoff;
    std::string eval_format = "csv", eval_out;
    int eval_t_min = -1, eval_t_max = 20;
    eval_cmd->add_option("--model", eval_model, "trained model file");
    eval_cmd->add_option("--ensemble-manifest", eval_ensemble, "ensemble manifest file");
    eval_cmd->add_option("--baseline", eval_baseline, "baseline classifier: knn|nb|cart|forest");
    eval_cmd->add_option("--test", eval_test, "evaluation dataset CSV")->required();
    eval_cmd->add_option("--train-data", eval_train_data, "baseline training dataset CSV");
    eval_cmd->add_option("--cutoff", eval_cutoff,
                         "ISO-8601 UTC date split; evaluation uses the at-or-after side");
    eval_cmd->add_option("--t-min", eval_t_min, "first snapshot time (default 1; baselines may use 0)");
    eval_cmd->add_option("--t-max", eval_t_max, "last snapshot time")->capture_default_str();
    eval_cmd->add_option("--format", eval_format, "csv|json|both")->capture_default_str();
    eval_cmd->add_option("-o,--out", eval_out, "output directory")->required();

    // holdout
    auto* holdout = app.add_subcommand("holdout", "family/variant omission (zero-day simulation)");
    std::string hd_data, hd_key = "family", hd_value, hd_config, hd_format = "csv", hd_out;
    int hd_replicates = 1, hd_t_min = 1, hd_t_max = 10;
    holdout->add_option("--data", hd_data, "dataset CSV")->required();
    holdout->add_option("--holdout-key", hd_key, "family|variant")->capture_default_str();
    holdout->add_option("--holdout-value", hd_value, "group removed from training")->required();
    holdout->add_option("--config", hd_config, "config JSON path or preset:{A,B,C}")->required();
    holdout->add_option("--replicates", hd_replicates, "fresh models trained (seeds derived)")
        ->capture_default_str();
    holdout->add_option("--t-min", hd_t_min)->capture_default_str();
    holdout->add_option("--t-max", hd_t_max)->capture_default_str();
    holdout->add_option("--format", hd_format, "csv|json|both")->capture_default_str();
    holdout->add_option("-o,--out", hd_out, "output directory")->required();

    // ablate
    auto* ablate = app.add_subcommand("ablate", "feature masking: impact factors and feature-on search");
    std::string ab_model, ab_test, ab_cutoff, ab_format = "csv", ab_out;
    int ab_time = 4, ab_subset = 1, ab_features_on = 0;
    ablate->add_option("--model", ab_model, "trained model file")->required();
    ablate->add_option("--test", ab_test, "evaluation dataset CSV")->required();
    ablate->add_option("--cutoff", ab_cutoff, "ISO-8601 UTC date split; uses the at-or-after side");
    ablate->add_option("--at-time", ab_time, "snapshot time of the ablation")->capture_default_str();
    ablate->add_option("--subset-size", ab_subset, "impact factors for k = 1..this (max 3)")
        ->capture_default_str();
    ablate->add_option("--features-on", ab_features_on,
                       "also search best ON-subsets up to this size (0 = off)")
        ->capture_default_str();
    ablate->add_option("--format", ab_format, "csv|json|both")->capture_default_str();
    ablate->add_option("-o,--out", ab_out, "output directory")->required();

    // ensemble
    auto* ens = app.add_subcommand("ensemble", "build a max-score ensemble and evaluate it");
    std::vector<std::string> ens_models;
    std::string ens_test, ens_cutoff, ens_format = "csv", ens_out;
    int ens_t_min = 1, ens_t_max = 20;
    double ens_alpha = 0.01;
    ens->add_option("--models", ens_models, "member model files")->required()->expected(-1);
    ens->add_option("--test", ens_test, "evaluation dataset CSV (omit to only write the manifest)");
    ens->add_option("--cutoff", ens_cutoff, "ISO-8601 UTC date split; uses the at-or-after side");
    ens->add_option("--t-min", ens_t_min)->capture_default_str();
    ens->add_option("--t-max", ens_t_max)->capture_default_str();
    ens->add_option("--alpha", ens_alpha, "significance level of the confidence t-test")
        ->capture_default_str();
    ens->add_option("--format", ens_format, "csv|json|both")->capture_default_str();
    ens->add_option("-o,--out", ens_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (jobs > 0) omp_set_num_threads(jobs);

    try {
        if (synth->parsed())
            return run_synth(argc, argv, seed, jobs, benign, malicious, snapshots, late_fraction, synth_out);
        if (search->parsed())
            return run_search(argc, argv, seed, jobs, search_data, space_file, trials, k_folds, search_out);
        if (train_cmd->parsed())
            return run_train(argc, argv, seed, jobs, train_config, train_data, train_cutoff, train_out);
        if (eval_cmd->parsed()) {
            const int t_min = eval_t_min >= 0 ? eval_t_min : (eval_baseline.empty() ? 1 : 0);
            return run_eval(argc, argv, seed, jobs, eval_model, eval_ensemble, eval_baseline, eval_test,
                            eval_train_data, eval_cutoff, t_min, eval_t_max, eval_format, eval_out);
        }
        if (holdout->parsed())
            return run_holdout(argc, argv, seed, jobs, hd_data, hd_key, hd_value, hd_config, hd_replicates,
                               hd_t_min, hd_t_max, hd_format, hd_out);
        if (ablate->parsed())
            return run_ablate(argc, argv, seed, jobs, ab_model, ab_test, ab_cutoff, ab_time, ab_subset,
                              ab_features_on, ab_format, ab_out);
        if (ens->parsed())
            return run_ensemble(argc, argv, seed, jobs, ens_models, ens_test, ens_cutoff, ens_t_min,
                                ens_t_max, ens_alpha, ens_format, ens_out);
    } catch (const FileError& e) {
        std::fprintf(stderr, "error: file: %s\n", e.what());
        return 3;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: validation: %s\n", e.what());
        return 4;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: experiment: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    }
    return 2;
}

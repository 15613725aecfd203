#include "earlyguard/search.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>

#include "earlyguard/errors.hpp"
#include "earlyguard/gru.hpp"
#include "earlyguard/log.hpp"
#include "earlyguard/normalizer.hpp"
#include "earlyguard/training.hpp"

namespace earlyguard {

void SearchSpace::validate() const {
    if (depths.empty() || bidirectional.empty() || dropout_rates.empty() || weight_regs.empty() ||
        bias_regs.empty() || batch_sizes.empty())
        throw ValidationError("search space: every domain must be non-empty");
    if (hidden_min < 1 || hidden_max < hidden_min || epochs_min < 1 || epochs_max < epochs_min)
        throw ValidationError("search space: bad hidden/epochs range");
    if (train_time_min < 1 || train_time_max < train_time_min || train_time_max > 20)
        throw ValidationError("search space: bad snapshot-time range");
}

std::uint64_t SearchSpace::cardinality() const {
    std::uint64_t card = depths.size();
    card *= bidirectional.size();
    card *= static_cast<std::uint64_t>(hidden_max - hidden_min + 1);
    card *= static_cast<std::uint64_t>(epochs_max - epochs_min + 1);
    card *= dropout_rates.size();
    card *= weight_regs.size();
    card *= bias_regs.size();
    card *= batch_sizes.size();
    return card;
}

nlohmann::json search_space_to_json(const SearchSpace& s) {
    auto regs = [](const std::vector<Regularizer>& v) {
        auto a = nlohmann::json::array();
        for (auto r : v) a.push_back(std::string(regularizer_name(r)));
        return a;
    };
    return nlohmann::json{
        {"Depth", s.depths},
        {"Bidirectional", s.bidirectional},
        {"Hidden neurons", {{"min", s.hidden_min}, {"max", s.hidden_max}}},
        {"Epochs", {{"min", s.epochs_min}, {"max", s.epochs_max}}},
        {"Dropout rate", s.dropout_rates},
        {"Weight regularisation", regs(s.weight_regs)},
        {"Bias regularisation", regs(s.bias_regs)},
        {"Batch size", s.batch_sizes},
        {"Time into execution (s)", {{"min", s.train_time_min}, {"max", s.train_time_max}}},
    };
}

SearchSpace search_space_from_json(const nlohmann::json& j) {
    SearchSpace s;
    try {
        if (j.contains("Depth")) s.depths = j.at("Depth").get<std::vector<int>>();
        if (j.contains("Bidirectional")) s.bidirectional = j.at("Bidirectional").get<std::vector<bool>>();
        if (j.contains("Hidden neurons")) {
            s.hidden_min = j.at("Hidden neurons").at("min").get<int>();
            s.hidden_max = j.at("Hidden neurons").at("max").get<int>();
        }
        if (j.contains("Epochs")) {
            s.epochs_min = j.at("Epochs").at("min").get<int>();
            s.epochs_max = j.at("Epochs").at("max").get<int>();
        }
        if (j.contains("Dropout rate")) s.dropout_rates = j.at("Dropout rate").get<std::vector<double>>();
        auto parse_regs = [](const nlohmann::json& a) {
            std::vector<Regularizer> v;
            for (const auto& e : a) v.push_back(parse_regularizer(e.get<std::string>()));
            return v;
        };
        if (j.contains("Weight regularisation")) s.weight_regs = parse_regs(j.at("Weight regularisation"));
        if (j.contains("Bias regularisation")) s.bias_regs = parse_regs(j.at("Bias regularisation"));
        if (j.contains("Batch size")) s.batch_sizes = j.at("Batch size").get<std::vector<int>>();
        if (j.contains("Time into execution (s)")) {
            s.train_time_min = j.at("Time into execution (s)").at("min").get<int>();
            s.train_time_max = j.at("Time into execution (s)").at("max").get<int>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad search-space file: ") + e.what());
    }
    s.validate();
    return s;
}

SearchSpace load_search_space(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open search-space file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("search-space file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return search_space_from_json(j);
}

HyperConfig sample_config(const SearchSpace& space, Rng& rng) {
    HyperConfig c;
    c.depth = rng.pick(space.depths);
    c.bidirectional = rng.pick(space.bidirectional);
    c.hidden_neurons = static_cast<int>(rng.uniform_int(space.hidden_min, space.hidden_max));
    c.epochs = static_cast<int>(rng.uniform_int(space.epochs_min, space.epochs_max));
    c.dropout_rate = rng.pick(space.dropout_rates);
    c.weight_reg = rng.pick(space.weight_regs);
    c.bias_reg = rng.pick(space.bias_regs);
    c.batch_size = rng.pick(space.batch_sizes);
    c.train_time_seconds = static_cast<int>(rng.uniform_int(space.train_time_min, space.train_time_max));
    c.validate();
    return c;
}

std::vector<std::vector<std::size_t>> kfold_split(const LabeledDataset& dataset, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("kfold: k must be >= 2");
    if (dataset.size() < static_cast<std::size_t>(k))
        throw ValidationError("kfold: dataset of " + std::to_string(dataset.size()) +
                              " traces cannot form " + std::to_string(k) + " folds");

    // Shuffle each class separately, concatenate, deal round-robin: fold
    // sizes differ by at most one and class counts stay balanced.
    std::vector<std::size_t> benign, malicious;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        (dataset.traces[i].label == Label::benign ? benign : malicious).push_back(i);
    Rng rng(derive_seed(seed, 0x666f6c64ULL));
    rng.shuffle(benign);
    rng.shuffle(malicious);

    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    std::size_t pos = 0;
    for (const auto* cls : {&benign, &malicious})
        for (const auto idx : *cls) folds[pos++ % static_cast<std::size_t>(k)].push_back(idx);
    return folds;
}

TrialResult evaluate_config(const HyperConfig& config, const LabeledDataset& dataset, int k,
                            std::uint64_t seed) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto folds = kfold_split(dataset, k, derive_seed(seed, 0x6b666f6cULL));

    TrialResult res;
    res.config = config;
    double fp_sum = 0.0, fn_sum = 0.0;
    int fp_folds = 0, fn_folds = 0;

    for (std::size_t fi = 0; fi < folds.size(); ++fi) {
        try {
            LabeledDataset train_part;
            train_part.role = DatasetRole::train;
            for (std::size_t fj = 0; fj < folds.size(); ++fj) {
                if (fj == fi) continue;
                for (const auto idx : folds[fj]) train_part.traces.push_back(dataset.traces[idx]);
            }
            const Normalizer norm = fit_normalizer(train_part);
            GruNetwork net = init_params(config, derive_seed(seed, 0x696e6974ULL, fi));
            train(net, train_part, norm, derive_seed(seed, 0x747261696eULL, fi));

            std::size_t correct = 0, fp = 0, fn = 0, n_benign = 0, n_malicious = 0;
            for (const auto idx : folds[fi]) {
                const auto& tr = dataset.traces[idx];
                const Label pred = classify(predict_proba(net, tr, config.train_time_seconds));
                if (tr.label == Label::benign) {
                    ++n_benign;
                    if (pred == Label::malicious) ++fp; else ++correct;
                } else {
                    ++n_malicious;
                    if (pred == Label::benign) ++fn; else ++correct;
                }
            }
            res.fold_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(folds[fi].size()));
            if (n_benign > 0) {
                fp_sum += static_cast<double>(fp) / static_cast<double>(n_benign);
                ++fp_folds;
            }
            if (n_malicious > 0) {
                fn_sum += static_cast<double>(fn) / static_cast<double>(n_malicious);
                ++fn_folds;
            }
        } catch (const Error& e) {
            throw ExperimentError("fold " + std::to_string(fi) + ": " + e.what());
        }
    }

    double acc_sum = 0.0;
    for (const double a : res.fold_accuracy) acc_sum += a;
    res.mean_accuracy = acc_sum / static_cast<double>(res.fold_accuracy.size());
    if (fp_folds > 0) res.mean_fp_rate = fp_sum / fp_folds;
    if (fn_folds > 0) res.mean_fn_rate = fn_sum / fn_folds;
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

namespace {

void rank_results(std::vector<TrialResult>& v) {
    std::sort(v.begin(), v.end(), [](const TrialResult& a, const TrialResult& b) {
        if (a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
        const double afn = a.mean_fn_rate.value_or(std::numeric_limits<double>::infinity());
        const double bfn = b.mean_fn_rate.value_or(std::numeric_limits<double>::infinity());
        if (afn != bfn) return afn < bfn;
        return a.draw_index < b.draw_index;
    });
}

}  // namespace

SearchOutcome random_search(const SearchSpace& space, const LabeledDataset& dataset, int trials, int k,
                            std::uint64_t seed) {
    space.validate();
    if (trials < 1) throw ValidationError("random_search: trials must be >= 1");

    // Draw all configurations up front from one stream so the sampled
    // sequence never depends on evaluation order.
    std::vector<HyperConfig> configs;
    configs.reserve(static_cast<std::size_t>(trials));
    Rng sample_rng(derive_seed(seed, 0x73616d70ULL));
    for (int i = 0; i < trials; ++i) configs.push_back(sample_config(space, sample_rng));

    std::vector<std::optional<TrialResult>> slots(static_cast<std::size_t>(trials));
    std::vector<std::optional<TrialFailure>> fails(static_cast<std::size_t>(trials));

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < trials; ++i) {
        try {
            TrialResult r = evaluate_config(configs[static_cast<std::size_t>(i)], dataset, k,
                                            derive_seed(seed, 0x747269616cULL, static_cast<std::uint64_t>(i)));
            r.draw_index = i;
            slots[static_cast<std::size_t>(i)] = std::move(r);
        } catch (const std::exception& e) {
            fails[static_cast<std::size_t>(i)] =
                TrialFailure{i, configs[static_cast<std::size_t>(i)], e.what()};
        }
    }

    SearchOutcome out;
    for (auto& s : slots)
        if (s) out.ranked.push_back(std::move(*s));
    for (auto& f : fails)
        if (f) {
            log::warn("trial %d failed: %s", f->trial_index, f->message.c_str());
            out.failures.push_back(std::move(*f));
        }
    if (out.ranked.empty())
        throw ExperimentError("random_search: all " + std::to_string(trials) + " trials failed (first: " +
                              out.failures.front().message + ")");
    rank_results(out.ranked);
    return out;
}

std::vector<TrialResult> select_best_early(const std::vector<TrialResult>& ranked, int t_max) {
    std::vector<TrialResult> picked;
    for (int t = 1; t <= t_max; ++t) {
        // `ranked` is already in preference order; the first hit at this
        // snapshot time is the winner.
        for (const auto& r : ranked) {
            if (r.config.train_time_seconds != t) continue;
            HyperConfig key = r.config;
            const bool dup = std::any_of(picked.begin(), picked.end(), [&](const TrialResult& p) {
                HyperConfig q = p.config;
                q.train_time_seconds = key.train_time_seconds;  // compare the eight table fields
                return q == key;
            });
            if (!dup) picked.push_back(r);
            break;
        }
    }
    return picked;
}

}  // namespace earlyguard

#include "earlyguard/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "earlyguard/errors.hpp"
#include "earlyguard/model_io.hpp"

namespace earlyguard {

void Ensemble::validate() const {
    if (members.empty()) throw ValidationError("ensemble: needs at least one member");
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (!members[i].normalizer.has_value())
            throw ValidationError("ensemble member " + std::to_string(i) + " has no normalizer");
        if (members[i].input_dim != members[0].input_dim)
            throw ValidationError("ensemble members disagree on the input feature contract");
    }
}

double ensemble_score(const Ensemble& e, const BehaviorTrace& trace, int t_seconds) {
    e.validate();
    double best = 0.0;
    for (std::size_t i = 0; i < e.members.size(); ++i) {
        const double s = predict_proba(e.members[i], trace, t_seconds);
        if (i == 0 || s > best) best = s;
    }
    return best;
}

Label ensemble_classify(const Ensemble& e, const BehaviorTrace& trace, int t_seconds) {
    return classify(ensemble_score(e, trace, t_seconds), e.threshold);
}

double confidence(int true_label01, double score) {
    if (true_label01 != 0 && true_label01 != 1) throw ValidationError("confidence: label must be 0 or 1");
    if (score < 0.0 || score > 1.0) throw ValidationError("confidence: score must lie in [0,1]");
    return 1.0 - std::abs(static_cast<double>(true_label01) - score);
}

TTestResult confidence_ttest(const std::vector<double>& a, const std::vector<double>& b, double alpha) {
    if (a.size() != b.size()) throw ValidationError("t-test: paired lists differ in length");
    const std::size_t n = a.size();
    if (n < 2) throw ValidationError("t-test: needs at least two pairs");

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (a[i] - b[i]) - mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(n - 1);  // sample variance of the differences

    TTestResult r;
    if (var <= 0.0) {
        r.degenerate = true;
        r.t_stat = 0.0;
        r.p_value = 1.0;
        r.significant = false;
        return r;
    }
    r.t_stat = mean / std::sqrt(var / static_cast<double>(n));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.t_stat));  // one-sided: mean(a-b) > 0
    r.significant = r.p_value < alpha;
    return r;
}

void save_ensemble_manifest(const Ensemble& e, const std::vector<std::string>& member_paths,
                            const std::filesystem::path& path) {
    e.validate();
    if (member_paths.size() != e.members.size())
        throw ValidationError("ensemble manifest: one path per member required");
    nlohmann::json j{{"format_version", 1}, {"threshold", e.threshold}};
    auto members = nlohmann::json::array();
    for (std::size_t i = 0; i < e.members.size(); ++i) {
        members.push_back({{"model", member_paths[i]},
                           {"config_digest", config_digest(e.members[i].config)},
                           {"init_seed", e.members[i].init_seed},
                           {"train_seed", e.members[i].train_seed}});
    }
    j["members"] = std::move(members);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write ensemble manifest '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

Ensemble load_ensemble_from_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open ensemble manifest '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("ensemble manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
    Ensemble e;
    try {
        if (j.at("format_version").get<int>() != 1)
            throw ValidationError("ensemble manifest '" + path.string() + "' has unsupported format version");
        e.threshold = j.at("threshold").get<double>();
        for (const auto& m : j.at("members")) {
            std::filesystem::path model_path = m.at("model").get<std::string>();
            if (model_path.is_relative()) model_path = path.parent_path() / model_path;
            e.members.push_back(load_model(model_path));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError(std::string("bad ensemble manifest: ") + ex.what());
    }
    e.validate();
    return e;
}

}  // namespace earlyguard

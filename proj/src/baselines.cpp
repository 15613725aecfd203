#include "earlyguard/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "earlyguard/errors.hpp"
#include "earlyguard/parallel.hpp"
#include "earlyguard/rng.hpp"

namespace earlyguard {

Eigen::VectorXd flatten(const BehaviorTrace& trace, const Normalizer& norm, int t_seconds) {
    const StdSequence seq = apply_normalizer_prefix(norm, trace, t_seconds);
    Eigen::VectorXd out(seq.size());
    for (Eigen::Index t = 0; t < seq.cols(); ++t) out.segment(t * kNumFeatures, kNumFeatures) = seq.col(t);
    return out;
}

FlatDataset flatten_dataset(const LabeledDataset& data, const Normalizer& norm, int t_seconds) {
    if (data.traces.empty()) throw ValidationError("flatten_dataset: empty dataset");
    FlatDataset out;
    out.X.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(kNumFeatures) * (t_seconds + 1));
    out.y.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = flatten(data.traces[i], norm, t_seconds).transpose();
        out.y.push_back(data.traces[i].label == Label::malicious ? 1 : 0);
    }
    return out;
}

// ---- kNN ----

KnnModel knn_train(const FlatDataset& train, int k) {
    if (k < 1) throw ValidationError("knn: k must be >= 1");
    if (static_cast<Eigen::Index>(k) > train.X.rows())
        throw ValidationError("knn: k=" + std::to_string(k) + " exceeds training size " +
                              std::to_string(train.X.rows()));
    return {k, train.X, train.y};
}

double knn_predict_score(const KnnModel& m, const Eigen::VectorXd& q) {
    if (q.size() != m.X.cols()) throw ValidationError("knn: query width does not match training data");
    const auto n = static_cast<std::size_t>(m.X.rows());
    std::vector<std::pair<double, std::size_t>> d(n);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = {(m.X.row(static_cast<Eigen::Index>(i)).transpose() - q).squaredNorm(), i};
    std::partial_sort(d.begin(), d.begin() + m.k, d.end());  // (distance, index): ties to lower index
    int malicious = 0;
    for (int i = 0; i < m.k; ++i) malicious += m.y[d[static_cast<std::size_t>(i)].second];
    return static_cast<double>(malicious) / static_cast<double>(m.k);
}

// ---- Gaussian NB ----

GaussianNbModel gaussian_nb_train(const FlatDataset& train) {
    const Eigen::Index d = train.X.cols();
    std::array<Eigen::Index, 2> count{0, 0};
    for (const int label : train.y) ++count[static_cast<std::size_t>(label)];
    if (count[0] == 0 || count[1] == 0)
        throw ValidationError("gaussian_nb: training set must contain both classes");

    GaussianNbModel m;
    for (int cls = 0; cls < 2; ++cls) {
        m.mean[static_cast<std::size_t>(cls)] = Eigen::VectorXd::Zero(d);
        m.var[static_cast<std::size_t>(cls)] = Eigen::VectorXd::Zero(d);
    }
    for (Eigen::Index i = 0; i < train.X.rows(); ++i)
        m.mean[static_cast<std::size_t>(train.y[static_cast<std::size_t>(i)])] += train.X.row(i).transpose();
    for (int cls = 0; cls < 2; ++cls) m.mean[static_cast<std::size_t>(cls)] /= static_cast<double>(count[static_cast<std::size_t>(cls)]);
    for (Eigen::Index i = 0; i < train.X.rows(); ++i) {
        const auto cls = static_cast<std::size_t>(train.y[static_cast<std::size_t>(i)]);
        const Eigen::VectorXd dev = train.X.row(i).transpose() - m.mean[cls];
        m.var[cls] += dev.cwiseProduct(dev);
    }
    for (int cls = 0; cls < 2; ++cls) {
        auto& v = m.var[static_cast<std::size_t>(cls)];
        v /= static_cast<double>(count[static_cast<std::size_t>(cls)]);
        v = (v.array() + kNbVarSmoothing).matrix();
        m.log_prior[static_cast<std::size_t>(cls)] =
            std::log(static_cast<double>(count[static_cast<std::size_t>(cls)]) / static_cast<double>(train.y.size()));
    }
    return m;
}

double gaussian_nb_log_posterior(const GaussianNbModel& m, const Eigen::VectorXd& q, int cls) {
    const auto c = static_cast<std::size_t>(cls);
    const Eigen::ArrayXd dev = (q - m.mean[c]).array();
    const Eigen::ArrayXd var = m.var[c].array();
    return m.log_prior[c] + (-0.5 * (2.0 * M_PI * var).log() - dev.square() / (2.0 * var)).sum();
}

double gaussian_nb_predict_score(const GaussianNbModel& m, const Eigen::VectorXd& q) {
    const double x = gaussian_nb_log_posterior(m, q, 1) - gaussian_nb_log_posterior(m, q, 0);
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// ---- CART ----

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};

double gini(std::size_t n1, std::size_t n) {
    const double p1 = static_cast<double>(n1) / static_cast<double>(n);
    const double p0 = 1.0 - p1;
    return 1.0 - p0 * p0 - p1 * p1;
}

SplitChoice best_split(const Eigen::MatrixXd& X, const std::vector<int>& y,
                       const std::vector<Eigen::Index>& idx, const std::vector<int>& features,
                       int min_leaf) {
    const std::size_t n = idx.size();
    std::size_t n1 = 0;
    for (const auto i : idx) n1 += static_cast<std::size_t>(y[static_cast<std::size_t>(i)]);
    const double g_parent = gini(n1, n);

    SplitChoice best;
    std::vector<std::pair<double, int>> vals(n);
    for (const int f : features) {  // ascending feature order fixes the tie-break
        for (std::size_t i = 0; i < n; ++i)
            vals[i] = {X(idx[i], f), y[static_cast<std::size_t>(idx[i])]};
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::size_t left_n1 = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_n1 += static_cast<std::size_t>(vals[i].second);
            if (vals[i].first == vals[i + 1].first) continue;
            const std::size_t nL = i + 1, nR = n - nL;
            if (nL < static_cast<std::size_t>(min_leaf) || nR < static_cast<std::size_t>(min_leaf)) continue;
            const double w = g_parent -
                             (static_cast<double>(nL) / static_cast<double>(n)) * gini(left_n1, nL) -
                             (static_cast<double>(nR) / static_cast<double>(n)) * gini(n1 - left_n1, nR);
            if (w > best.decrease || !best.found) {
                // Strict comparison within ascending (feature, threshold)
                // enumeration keeps the lowest feature / lowest threshold on ties.
                if (best.found && w <= best.decrease) continue;
                best.found = true;
                best.feature = f;
                best.threshold = vals[i].first + (vals[i + 1].first - vals[i].first) / 2.0;
                best.decrease = w;
            }
        }
    }
    return best;
}

struct CartBuilder {
    const Eigen::MatrixXd& X;
    const std::vector<int>& y;
    CartParams params;
    int mtry;   // features considered per split; == all when no rng
    Rng* rng;   // nullptr = consider every feature
    CartModel model;

    int build(std::vector<Eigen::Index>& idx, int depth) {
        const int node_id = static_cast<int>(model.nodes.size());
        model.nodes.emplace_back();

        std::size_t n1 = 0;
        for (const auto i : idx) n1 += static_cast<std::size_t>(y[static_cast<std::size_t>(i)]);
        const double frac = static_cast<double>(n1) / static_cast<double>(idx.size());

        const bool pure = n1 == 0 || n1 == idx.size();
        const bool depth_capped = params.max_depth >= 0 && depth >= params.max_depth;
        if (pure || depth_capped || idx.size() < 2 * static_cast<std::size_t>(params.min_leaf)) {
            model.nodes[static_cast<std::size_t>(node_id)].malicious_fraction = frac;
            return node_id;
        }

        const SplitChoice split = best_split(X, y, idx, candidate_features(), params.min_leaf);
        if (!split.found) {
            model.nodes[static_cast<std::size_t>(node_id)].malicious_fraction = frac;
            return node_id;
        }

        std::vector<Eigen::Index> left, right;
        for (const auto i : idx)
            (X(i, split.feature) < split.threshold ? left : right).push_back(i);

        model.nodes[static_cast<std::size_t>(node_id)].leaf = false;
        model.nodes[static_cast<std::size_t>(node_id)].feature = split.feature;
        model.nodes[static_cast<std::size_t>(node_id)].threshold = split.threshold;
        model.nodes[static_cast<std::size_t>(node_id)].malicious_fraction = frac;
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        model.nodes[static_cast<std::size_t>(node_id)].left = l;
        model.nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }

    std::vector<int> candidate_features() {
        const int d = static_cast<int>(X.cols());
        std::vector<int> all(static_cast<std::size_t>(d));
        std::iota(all.begin(), all.end(), 0);
        if (rng == nullptr || mtry >= d) return all;
        // Partial Fisher-Yates, then ascending order for the tie-break rule.
        for (int i = 0; i < mtry; ++i) {
            const auto j = static_cast<std::size_t>(rng->uniform_int(i, d - 1));
            std::swap(all[static_cast<std::size_t>(i)], all[j]);
        }
        all.resize(static_cast<std::size_t>(mtry));
        std::sort(all.begin(), all.end());
        return all;
    }
};

CartModel cart_train_impl(const Eigen::MatrixXd& X, const std::vector<int>& y,
                          const std::vector<Eigen::Index>& idx, const CartParams& params, int mtry,
                          Rng* rng) {
    CartBuilder b{X, y, params, mtry, rng, {}};
    std::vector<Eigen::Index> root = idx;
    b.build(root, 0);
    return std::move(b.model);
}

}  // namespace

CartModel cart_train(const FlatDataset& train, const CartParams& params) {
    if (train.X.rows() == 0) throw ValidationError("cart: empty training set");
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(train.X.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    return cart_train_impl(train.X, train.y, idx, params, static_cast<int>(train.X.cols()), nullptr);
}

double cart_predict_score(const CartModel& m, const Eigen::VectorXd& q) {
    if (m.nodes.empty()) throw ValidationError("cart: model is empty");
    int cur = 0;
    while (!m.nodes[static_cast<std::size_t>(cur)].leaf) {
        const auto& node = m.nodes[static_cast<std::size_t>(cur)];
        cur = q[node.feature] < node.threshold ? node.left : node.right;
    }
    return m.nodes[static_cast<std::size_t>(cur)].malicious_fraction;
}

ForestModel forest_train(const FlatDataset& train, const ForestParams& params) {
    if (train.X.rows() == 0) throw ValidationError("forest: empty training set");
    if (params.trees < 1) throw ValidationError("forest: trees must be >= 1");

    const int d = static_cast<int>(train.X.cols());
    const int mtry = params.subsample == FeatureSubsample::all
                         ? d
                         : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
    const auto n = static_cast<std::size_t>(train.X.rows());

    ForestModel model;
    model.params = params;
    model.trees.resize(static_cast<std::size_t>(params.trees));
    detail::OmpExceptionGuard guard;

#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < params.trees; ++t) {
        if (guard.skip()) continue;
        try {
            Rng rng(derive_seed(params.seed, 0x74726565ULL, static_cast<std::uint64_t>(t)));
            std::vector<Eigen::Index> idx;
            idx.reserve(n);
            if (params.bootstrap) {
                for (std::size_t i = 0; i < n; ++i)
                    idx.push_back(static_cast<Eigen::Index>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)));
            } else {
                idx.resize(n);
                std::iota(idx.begin(), idx.end(), 0);
            }
            Rng* feature_rng = mtry < d ? &rng : nullptr;
            model.trees[static_cast<std::size_t>(t)] =
                cart_train_impl(train.X, train.y, idx, params.tree_params, mtry, feature_rng);
        } catch (...) {
            guard.capture();
        }
    }
    guard.rethrow_if_any();
    return model;
}

std::vector<int> forest_tree_votes(const ForestModel& m, const Eigen::VectorXd& q) {
    std::vector<int> votes;
    votes.reserve(m.trees.size());
    for (const auto& tree : m.trees) votes.push_back(cart_predict_score(tree, q) >= 0.5 ? 1 : 0);
    return votes;
}

double forest_predict_score(const ForestModel& m, const Eigen::VectorXd& q) {
    const auto votes = forest_tree_votes(m, q);
    int malicious = 0;
    for (const int v : votes) malicious += v;
    return static_cast<double>(malicious) / static_cast<double>(votes.size());
}

// ---- shared front door ----

BaselineKind parse_baseline_kind(std::string_view s) {
    if (s == "knn") return BaselineKind::knn;
    if (s == "nb") return BaselineKind::gaussian_nb;
    if (s == "cart") return BaselineKind::cart;
    if (s == "forest") return BaselineKind::random_forest;
    throw ValidationError("unknown baseline '" + std::string(s) + "' (expected knn|nb|cart|forest)");
}

std::string_view baseline_kind_name(BaselineKind k) {
    switch (k) {
        case BaselineKind::knn: return "knn";
        case BaselineKind::gaussian_nb: return "nb";
        case BaselineKind::cart: return "cart";
        case BaselineKind::random_forest: return "forest";
    }
    return "knn";
}

BaselineModel train_baseline(BaselineKind kind, const LabeledDataset& train, int t_seconds,
                             std::uint64_t seed) {
    BaselineModel m;
    m.kind = kind;
    m.t_seconds = t_seconds;
    m.normalizer = fit_normalizer(train);
    const FlatDataset flat = flatten_dataset(train, m.normalizer, t_seconds);
    switch (kind) {
        case BaselineKind::knn:
            m.impl = knn_train(flat, std::min<int>(5, static_cast<int>(flat.X.rows())));
            break;
        case BaselineKind::gaussian_nb:
            m.impl = gaussian_nb_train(flat);
            break;
        case BaselineKind::cart:
            m.impl = cart_train(flat);
            break;
        case BaselineKind::random_forest: {
            ForestParams fp;
            fp.seed = seed;
            m.impl = forest_train(flat, fp);
            break;
        }
    }
    return m;
}

double baseline_score(const BaselineModel& m, const BehaviorTrace& trace, int t_seconds) {
    if (t_seconds != m.t_seconds)
        throw ValidationError("baseline trained at t=" + std::to_string(m.t_seconds) +
                              " cannot score t=" + std::to_string(t_seconds));
    const Eigen::VectorXd q = flatten(trace, m.normalizer, t_seconds);
    switch (m.kind) {
        case BaselineKind::knn: return knn_predict_score(std::get<KnnModel>(m.impl), q);
        case BaselineKind::gaussian_nb: return gaussian_nb_predict_score(std::get<GaussianNbModel>(m.impl), q);
        case BaselineKind::cart: return cart_predict_score(std::get<CartModel>(m.impl), q);
        case BaselineKind::random_forest: return forest_predict_score(std::get<ForestModel>(m.impl), q);
    }
    throw ValidationError("baseline_score: bad kind");
}

// ---- serialization ----

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

Eigen::MatrixXd mat_from_json(const nlohmann::json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) return {};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw ValidationError("baseline file: ragged matrix");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return m;
}

nlohmann::json cart_to_json(const CartModel& m) {
    auto nodes = nlohmann::json::array();
    for (const auto& n : m.nodes)
        nodes.push_back({{"leaf", n.leaf},
                         {"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"malicious_fraction", n.malicious_fraction}});
    return nodes;
}

CartModel cart_from_json(const nlohmann::json& j) {
    CartModel m;
    for (const auto& n : j) {
        CartNode node;
        node.leaf = n.at("leaf").get<bool>();
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.malicious_fraction = n.at("malicious_fraction").get<double>();
        m.nodes.push_back(node);
    }
    return m;
}

}  // namespace

void save_baseline(const BaselineModel& m, const std::filesystem::path& path) {
    nlohmann::json j{{"magic", "EGB1"},
                     {"format_version", 1},
                     {"kind", std::string(baseline_kind_name(m.kind))},
                     {"t_seconds", m.t_seconds},
                     {"normalizer",
                      {{"mu", m.normalizer.mu}, {"sigma", m.normalizer.sigma}, {"fitted_on", m.normalizer.fitted_on}}}};
    switch (m.kind) {
        case BaselineKind::knn: {
            const auto& k = std::get<KnnModel>(m.impl);
            j["model"] = {{"k", k.k}, {"X", mat_to_json(k.X)}, {"y", k.y}};
            break;
        }
        case BaselineKind::gaussian_nb: {
            const auto& nb = std::get<GaussianNbModel>(m.impl);
            j["model"] = {{"log_prior", nb.log_prior},
                          {"mean_benign", vec_to_json(nb.mean[0])},
                          {"mean_malicious", vec_to_json(nb.mean[1])},
                          {"var_benign", vec_to_json(nb.var[0])},
                          {"var_malicious", vec_to_json(nb.var[1])}};
            break;
        }
        case BaselineKind::cart:
            j["model"] = {{"nodes", cart_to_json(std::get<CartModel>(m.impl))}};
            break;
        case BaselineKind::random_forest: {
            const auto& f = std::get<ForestModel>(m.impl);
            auto trees = nlohmann::json::array();
            for (const auto& t : f.trees) trees.push_back(cart_to_json(t));
            j["model"] = {{"trees", trees},
                          {"bootstrap", f.params.bootstrap},
                          {"subsample", f.params.subsample == FeatureSubsample::all ? "all" : "sqrt"},
                          {"seed", f.params.seed}};
            break;
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write baseline file '" + path.string() + "'");
    out << j.dump() << '\n';
}

BaselineModel load_baseline(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open baseline file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("baseline file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    try {
        if (j.at("magic").get<std::string>() != "EGB1")
            throw ValidationError("'" + path.string() + "' is not a baseline model file");
        if (j.at("format_version").get<int>() != 1)
            throw ValidationError("baseline file '" + path.string() + "' has unsupported format version");
        BaselineModel m;
        m.kind = parse_baseline_kind(j.at("kind").get<std::string>());
        m.t_seconds = j.at("t_seconds").get<int>();
        const auto& nj = j.at("normalizer");
        const auto mu = nj.at("mu").get<std::vector<double>>();
        const auto sigma = nj.at("sigma").get<std::vector<double>>();
        if (mu.size() != kNumFeatures || sigma.size() != kNumFeatures)
            throw ValidationError("baseline normalizer must carry " + std::to_string(kNumFeatures) + " features");
        std::copy(mu.begin(), mu.end(), m.normalizer.mu.begin());
        std::copy(sigma.begin(), sigma.end(), m.normalizer.sigma.begin());
        m.normalizer.fitted_on = nj.at("fitted_on").get<std::uint64_t>();
        const auto& mj = j.at("model");
        switch (m.kind) {
            case BaselineKind::knn: {
                KnnModel k;
                k.k = mj.at("k").get<int>();
                k.X = mat_from_json(mj.at("X"));
                k.y = mj.at("y").get<std::vector<int>>();
                m.impl = std::move(k);
                break;
            }
            case BaselineKind::gaussian_nb: {
                GaussianNbModel nb;
                nb.log_prior = mj.at("log_prior").get<std::array<double, 2>>();
                nb.mean[0] = vec_from_json(mj.at("mean_benign"));
                nb.mean[1] = vec_from_json(mj.at("mean_malicious"));
                nb.var[0] = vec_from_json(mj.at("var_benign"));
                nb.var[1] = vec_from_json(mj.at("var_malicious"));
                m.impl = std::move(nb);
                break;
            }
            case BaselineKind::cart:
                m.impl = cart_from_json(mj.at("nodes"));
                break;
            case BaselineKind::random_forest: {
                ForestModel f;
                f.params.bootstrap = mj.at("bootstrap").get<bool>();
                f.params.subsample =
                    mj.at("subsample").get<std::string>() == "all" ? FeatureSubsample::all : FeatureSubsample::sqrt_features;
                f.params.seed = mj.at("seed").get<std::uint64_t>();
                for (const auto& t : mj.at("trees")) f.trees.push_back(cart_from_json(t));
                f.params.trees = static_cast<int>(f.trees.size());
                m.impl = std::move(f);
                break;
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad baseline file: ") + e.what());
    }
}

}  // namespace earlyguard

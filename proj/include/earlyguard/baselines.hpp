#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "earlyguard/evaluation.hpp"
#include "earlyguard/normalizer.hpp"
#include "earlyguard/trace.hpp"

namespace earlyguard {

/// Concatenation of standardized snapshots 0..t in time order:
/// element 10*t + i is standardized feature i at second t. t = 0 is allowed
/// here (single snapshot) even though the recurrent model needs >= 2.
Eigen::VectorXd flatten(const BehaviorTrace& trace, const Normalizer& norm, int t_seconds);

struct FlatDataset {
    Eigen::MatrixXd X;          // one row per sample
    std::vector<int> y;         // 0 benign, 1 malicious
};

FlatDataset flatten_dataset(const LabeledDataset& data, const Normalizer& norm, int t_seconds);

// ---- k-nearest neighbours ----

struct KnnModel {
    int k = 5;
    Eigen::MatrixXd X;
    std::vector<int> y;
};

/// Stores the training set; throws ValidationError when k exceeds its size.
KnnModel knn_train(const FlatDataset& train, int k = 5);

/// Fraction of malicious labels among the k nearest (Euclidean) neighbours;
/// distance ties resolve to the lower training index. 0.5 classifies
/// malicious under the shared threshold rule.
double knn_predict_score(const KnnModel& m, const Eigen::VectorXd& q);

// ---- Gaussian naive Bayes ----

struct GaussianNbModel {
    std::array<double, 2> log_prior{};
    std::array<Eigen::VectorXd, 2> mean;
    std::array<Eigen::VectorXd, 2> var;  // smoothed: + 1e-9
};

inline constexpr double kNbVarSmoothing = 1e-9;

/// Class-conditional independent normals; throws ValidationError on a
/// single-class training set.
GaussianNbModel gaussian_nb_train(const FlatDataset& train);

/// Unnormalized log posterior of one class (prior + likelihood).
double gaussian_nb_log_posterior(const GaussianNbModel& m, const Eigen::VectorXd& q, int cls);

/// P(malicious | q); exactly 0.5 on symmetric ties.
double gaussian_nb_predict_score(const GaussianNbModel& m, const Eigen::VectorXd& q);

// ---- CART decision tree (Gini) ----

struct CartNode {
    bool leaf = true;
    int feature = -1;
    double threshold = 0.0;  // x[feature] < threshold goes left
    int left = -1, right = -1;
    double malicious_fraction = 0.0;  // leaf payload
};

struct CartModel {
    std::vector<CartNode> nodes;  // preorder; nodes[0] is the root
};

struct CartParams {
    int min_leaf = 1;
    int max_depth = -1;  // -1 = unbounded
};

/// Greedy binary splits maximizing Gini decrease over midpoint thresholds,
/// ties resolved to the lowest feature index, then the lowest threshold.
CartModel cart_train(const FlatDataset& train, const CartParams& params = {});

double cart_predict_score(const CartModel& m, const Eigen::VectorXd& q);

// ---- random forest ----

enum class FeatureSubsample { all, sqrt_features };

struct ForestParams {
    int trees = 100;
    bool bootstrap = true;
    FeatureSubsample subsample = FeatureSubsample::sqrt_features;
    std::uint64_t seed = 0;
    CartParams tree_params;
};

struct ForestModel {
    ForestParams params;
    std::vector<CartModel> trees;
};

/// Seeded bootstrapped CART trees with per-split feature subsampling; tree
/// seeds derive from (seed, tree index), so training is deterministic at any
/// thread count. trees=1 with bootstrap off and subsample=all reproduces
/// cart_train exactly.
ForestModel forest_train(const FlatDataset& train, const ForestParams& params);

/// Per-tree malicious votes (thresholded tree outputs), in tree order.
std::vector<int> forest_tree_votes(const ForestModel& m, const Eigen::VectorXd& q);

/// Fraction of trees voting malicious.
double forest_predict_score(const ForestModel& m, const Eigen::VectorXd& q);

// ---- shared front door ----

enum class BaselineKind { knn, gaussian_nb, cart, random_forest };

BaselineKind parse_baseline_kind(std::string_view s);  // knn|nb|cart|forest
std::string_view baseline_kind_name(BaselineKind k);

/// One trained baseline bound to the snapshot time it was trained at.
struct BaselineModel {
    BaselineKind kind = BaselineKind::knn;
    int t_seconds = 0;
    Normalizer normalizer;
    std::variant<KnnModel, GaussianNbModel, CartModel, ForestModel> impl;
};

BaselineModel train_baseline(BaselineKind kind, const LabeledDataset& train, int t_seconds,
                             std::uint64_t seed);

double baseline_score(const BaselineModel& m, const BehaviorTrace& trace, int t_seconds);

/// TraceScorer adapter so baselines run through the same time-sliced harness
/// as the recurrent models. The model answers only for the t it was trained
/// at; anything else is a ValidationError.
class BaselineScorer final : public TraceScorer {
public:
    explicit BaselineScorer(const BaselineModel& m) : m_(&m) {}
    double score(const BehaviorTrace& trace, int t_seconds) const override {
        return baseline_score(*m_, trace, t_seconds);
    }

private:
    const BaselineModel* m_;
};

// Versioned JSON container (format_version 1) with the kind tag, snapshot
// time, normalizer and the model payload.
void save_baseline(const BaselineModel& m, const std::filesystem::path& path);
BaselineModel load_baseline(const std::filesystem::path& path);

}  // namespace earlyguard

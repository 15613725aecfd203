#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "earlyguard/gru.hpp"
#include "earlyguard/normalizer.hpp"
#include "earlyguard/trace.hpp"

namespace earlyguard {

// Regularization strengths applied per the config's weight_reg / bias_reg
// modes: l1 adds lambda1 * sum|w|, l2 adds lambda2 * sum w^2.
inline constexpr double kLambdaL1 = 0.01;
inline constexpr double kLambdaL2 = 0.01;

// Scores are clamped into [kScoreClamp, 1 - kScoreClamp] inside the loss so
// the log stays finite.
inline constexpr double kScoreClamp = 1e-7;

/// Binary cross-entropy of a clamped score against label in {0,1}.
double bce_loss(double score, int label01);

/// Sum of the configured l1/l2 penalties over weights and biases.
double reg_penalty(const GruNetwork& net);

/// bce_loss plus reg_penalty: the per-sample training objective.
double loss_with_reg(const GruNetwork& net, double score, int label01);

/// Adds d(reg_penalty)/d(params) into grad. sign(0) is taken as 0.
void add_reg_gradient(const GruNetwork& net, Eigen::VectorXd& grad);

struct BatchGradient {
    Eigen::VectorXd grad;  // gradient of mean loss_with_reg over the batch
    double mean_loss = 0.0;
};

/// Exact gradient of the mean of loss_with_reg over the batch. All sequences
/// must share one length (a training batch is drawn at a single truncation
/// time). Dropout masks are fixed by (dropout_seed, position in batch), so
/// the result is reproducible. Per-sample passes run in parallel; the
/// reduction walks fixed-size chunks in batch order, so the sum is bit-equal
/// for any thread count.
BatchGradient batch_gradient(const GruNetwork& net, std::span<const StdSequence> seqs,
                             std::span<const int> labels, std::uint64_t dropout_seed);

struct AdamParams {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Eigen::VectorXd m, v;
    long step = 0;

    static AdamState zeros(Eigen::Index size) { return {Eigen::VectorXd::Zero(size), Eigen::VectorXd::Zero(size), 0}; }
};

/// One Adam update with bias-corrected moments; increments state.step.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               const AdamParams& ap = {});

struct TrainRecord {
    std::vector<double> epoch_mean_loss;  // one entry per epoch run
    int epochs_run = 0;
    double wall_seconds = 0.0;
};

/// Full training loop: per epoch, a seeded shuffle, truncation of every trace
/// to config.train_time_seconds, batching at config.batch_size (final partial
/// batch kept), batch_gradient + adam_step. Attaches the normalizer to the
/// network and marks it trained. Deterministic in (network init, seed).
/// Throws ValidationError listing the sample_ids of traces shorter than
/// train_time_seconds + 1.
TrainRecord train(GruNetwork& net, const LabeledDataset& train_set, const Normalizer& norm,
                  std::uint64_t seed);

/// Standardize with the stored normalizer, truncate to t_seconds, run
/// inference. t_seconds must be >= 1: a single snapshot carries no sequence.
double predict_proba(const GruNetwork& net, const BehaviorTrace& trace, int t_seconds);

/// Threshold rule: malicious iff score >= threshold. The tie at exactly the
/// threshold goes to malicious.
Label classify(double score, double threshold = 0.5);

}  // namespace earlyguard

#include "earlyguard/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "earlyguard/errors.hpp"
#include "earlyguard/log.hpp"
#include "earlyguard/parallel.hpp"
#include "earlyguard/rng.hpp"

namespace earlyguard {

namespace {
// Chunk width of the deterministic batch reduction. Fixed by batch index,
// never by thread count.
constexpr std::size_t kGradChunk = 8;
}  // namespace

double bce_loss(double score, int label01) {
    const double s = std::clamp(score, kScoreClamp, 1.0 - kScoreClamp);
    return label01 == 1 ? -std::log(s) : -std::log(1.0 - s);
}

double reg_penalty(const GruNetwork& net) {
    const bool w_l1 = reg_has_l1(net.config.weight_reg), w_l2 = reg_has_l2(net.config.weight_reg);
    const bool b_l1 = reg_has_l1(net.config.bias_reg), b_l2 = reg_has_l2(net.config.bias_reg);
    if (!(w_l1 || w_l2 || b_l1 || b_l2)) return 0.0;
    double total = 0.0;
    for (const auto& d : net.layout) {
        const bool l1 = d.is_bias ? b_l1 : w_l1;
        const bool l2 = d.is_bias ? b_l2 : w_l2;
        if (!(l1 || l2)) continue;
        const auto seg = net.params.segment(d.offset, d.size());
        if (l1) total += kLambdaL1 * seg.cwiseAbs().sum();
        if (l2) total += kLambdaL2 * seg.squaredNorm();
    }
    return total;
}

double loss_with_reg(const GruNetwork& net, double score, int label01) {
    return bce_loss(score, label01) + reg_penalty(net);
}

void add_reg_gradient(const GruNetwork& net, Eigen::VectorXd& grad) {
    const bool w_l1 = reg_has_l1(net.config.weight_reg), w_l2 = reg_has_l2(net.config.weight_reg);
    const bool b_l1 = reg_has_l1(net.config.bias_reg), b_l2 = reg_has_l2(net.config.bias_reg);
    if (!(w_l1 || w_l2 || b_l1 || b_l2)) return;
    for (const auto& d : net.layout) {
        const bool l1 = d.is_bias ? b_l1 : w_l1;
        const bool l2 = d.is_bias ? b_l2 : w_l2;
        if (!(l1 || l2)) continue;
        const auto seg = net.params.segment(d.offset, d.size());
        auto gseg = grad.segment(d.offset, d.size());
        if (l1) gseg += kLambdaL1 * seg.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
        if (l2) gseg += 2.0 * kLambdaL2 * seg;
    }
}

BatchGradient batch_gradient(const GruNetwork& net, std::span<const StdSequence> seqs,
                             std::span<const int> labels, std::uint64_t dropout_seed) {
    if (seqs.empty()) throw ValidationError("batch_gradient: empty batch");
    if (seqs.size() != labels.size()) throw ValidationError("batch_gradient: sequence/label count mismatch");
    const Eigen::Index len = seqs[0].cols();
    for (const auto& s : seqs)
        if (s.cols() != len) throw ValidationError("batch_gradient: sequences in a batch must share one length");

    const std::size_t B = seqs.size();
    const std::size_t n_chunks = (B + kGradChunk - 1) / kGradChunk;
    std::vector<Eigen::VectorXd> chunk_grads(n_chunks);
    std::vector<double> chunk_loss(n_chunks, 0.0);
    detail::OmpExceptionGuard guard;

#pragma omp parallel for schedule(dynamic)
    for (std::size_t ci = 0; ci < n_chunks; ++ci) {
        if (guard.skip()) continue;
        try {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(net.params.size());
            double loss = 0.0;
            ForwardCache cache;
            const std::size_t hi = std::min(B, (ci + 1) * kGradChunk);
            for (std::size_t i = ci * kGradChunk; i < hi; ++i) {
                const double score = gru_forward(net, seqs[i], true,
                                                 derive_seed(dropout_seed, static_cast<std::uint64_t>(i)), &cache);
                loss += bce_loss(score, labels[i]);
                gru_backward(net, cache, labels[i], g);
            }
            chunk_grads[ci] = std::move(g);
            chunk_loss[ci] = loss;
        } catch (...) {
            guard.capture();
        }
    }
    guard.rethrow_if_any();

    BatchGradient out;
    out.grad = Eigen::VectorXd::Zero(net.params.size());
    double loss_sum = 0.0;
    for (std::size_t ci = 0; ci < n_chunks; ++ci) {  // fixed merge order
        out.grad += chunk_grads[ci];
        loss_sum += chunk_loss[ci];
    }
    out.grad /= static_cast<double>(B);
    add_reg_gradient(net, out.grad);
    out.mean_loss = loss_sum / static_cast<double>(B) + reg_penalty(net);
    return out;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state, const AdamParams& ap) {
    if (params.size() != grad.size() || params.size() != state.m.size() || params.size() != state.v.size())
        throw ValidationError("adam_step: shape mismatch");
    state.step += 1;
    state.m = ap.beta1 * state.m + (1.0 - ap.beta1) * grad;
    state.v = ap.beta2 * state.v + (1.0 - ap.beta2) * grad.cwiseProduct(grad);
    const double mc = 1.0 - std::pow(ap.beta1, static_cast<double>(state.step));
    const double vc = 1.0 - std::pow(ap.beta2, static_cast<double>(state.step));
    params -= ap.lr * (state.m / mc).cwiseQuotient(((state.v / vc).cwiseSqrt().array() + ap.eps).matrix());
}

TrainRecord train(GruNetwork& net, const LabeledDataset& train_set, const Normalizer& norm, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const int t_train = net.config.train_time_seconds;

    std::string too_short;
    for (const auto& tr : train_set.traces)
        if (tr.snapshots.size() < static_cast<std::size_t>(t_train) + 1)
            too_short += (too_short.empty() ? "" : ", ") + tr.sample_id;
    if (!too_short.empty())
        throw ValidationError("train: traces shorter than t=" + std::to_string(t_train) + ": " + too_short);
    if (train_set.traces.empty()) throw ValidationError("train: empty training set");

    // Standardize and truncate once.
    std::vector<StdSequence> seqs;
    std::vector<int> all_labels;
    seqs.reserve(train_set.size());
    all_labels.reserve(train_set.size());
    for (const auto& tr : train_set.traces) {
        seqs.push_back(apply_normalizer_prefix(norm, tr, t_train));
        all_labels.push_back(tr.label == Label::malicious ? 1 : 0);
    }

    AdamState adam = AdamState::zeros(net.params.size());
    Rng shuffle_rng(derive_seed(seed, 0x73687566ULL));
    std::vector<std::size_t> order(seqs.size());
    std::iota(order.begin(), order.end(), 0);

    TrainRecord rec;
    const auto batch_size = static_cast<std::size_t>(net.config.batch_size);
    for (int epoch = 0; epoch < net.config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            std::vector<StdSequence> bseqs;
            std::vector<int> blabels;
            bseqs.reserve(end - start);
            blabels.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                bseqs.push_back(seqs[order[i]]);
                blabels.push_back(all_labels[order[i]]);
            }
            const auto bg = batch_gradient(net, bseqs, blabels,
                                           derive_seed(seed, static_cast<std::uint64_t>(epoch), batch_index));
            adam_step(net.params, bg.grad, adam);
            loss_sum += bg.mean_loss * static_cast<double>(end - start);
        }
        rec.epoch_mean_loss.push_back(loss_sum / static_cast<double>(order.size()));
        log::debug("epoch %d/%d mean loss %.6f", epoch + 1, net.config.epochs, rec.epoch_mean_loss.back());
    }
    rec.epochs_run = net.config.epochs;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    net.normalizer = norm;
    net.train_seed = seed;
    net.trained = true;
    return rec;
}

double predict_proba(const GruNetwork& net, const BehaviorTrace& trace, int t_seconds) {
    if (t_seconds < 1)
        throw ValidationError("predict: t=" + std::to_string(t_seconds) +
                              " gives a single snapshot, no sequence to classify");
    if (!net.normalizer.has_value()) throw ValidationError("predict: network has no normalizer attached");
    const StdSequence seq = apply_normalizer_prefix(*net.normalizer, trace, t_seconds);
    return gru_forward(net, seq, false, 0, nullptr);
}

Label classify(double score, double threshold) {
    return score >= threshold ? Label::malicious : Label::benign;
}

}  // namespace earlyguard

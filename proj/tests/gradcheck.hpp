#pragma once

// Finite-difference gradient oracle shared by the unit tests and the
// acceptance suite.

#include <algorithm>
#include <vector>

#include "earlyguard/gru.hpp"
#include "earlyguard/rng.hpp"
#include "earlyguard/training.hpp"
#include "helpers.hpp"

namespace testutil {

/// Same objective batch_gradient differentiates: mean clamped BCE over the
/// batch plus the regularisation penalty, dropout masks fixed by
/// (dropout_seed, position in batch).
inline double fd_batch_loss(earlyguard::GruNetwork& net,
                            const std::vector<earlyguard::StdSequence>& seqs,
                            const std::vector<int>& labels, std::uint64_t dropout_seed) {
    double sum = 0.0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const double score = earlyguard::gru_forward(
            net, seqs[i], true, earlyguard::derive_seed(dropout_seed, static_cast<std::uint64_t>(i)),
            nullptr);
        sum += earlyguard::bce_loss(score, labels[i]);
    }
    return sum / static_cast<double>(seqs.size()) + earlyguard::reg_penalty(net);
}

struct GradCheckResult {
    double max_rel_error = 0.0;
    Eigen::Index params_checked = 0;
};

/// Central finite differences (h = 1e-5) against the analytic gradient for
/// every parameter. Parameters are fully randomized (biases included, so l1
/// bias terms are differentiable at the evaluation point).
inline GradCheckResult gradcheck(const earlyguard::HyperConfig& config, std::uint64_t seed,
                                 int seq_len = 5, int batch = 3) {
    using namespace earlyguard;
    GruNetwork net = init_params(config, seed);
    Rng prng(derive_seed(seed, 0xabcdULL));
    for (Eigen::Index i = 0; i < net.params.size(); ++i) net.params[i] = prng.uniform(-0.5, 0.5);

    std::vector<StdSequence> seqs;
    std::vector<int> labels;
    for (int i = 0; i < batch; ++i) {
        seqs.push_back(random_sequence(seq_len, derive_seed(seed, 100 + static_cast<std::uint64_t>(i))));
        labels.push_back(i % 2);
    }
    const std::uint64_t dropout_seed = derive_seed(seed, 0xd0ULL);

    const Eigen::VectorXd analytic = batch_gradient(net, seqs, labels, dropout_seed).grad;

    constexpr double h = 1e-5;
    GradCheckResult res;
    res.params_checked = net.params.size();
    for (Eigen::Index p = 0; p < net.params.size(); ++p) {
        const double saved = net.params[p];
        net.params[p] = saved + h;
        const double up = fd_batch_loss(net, seqs, labels, dropout_seed);
        net.params[p] = saved - h;
        const double down = fd_batch_loss(net, seqs, labels, dropout_seed);
        net.params[p] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max(std::abs(analytic[p]), std::abs(fd));
        if (denom < 1e-10) continue;  // both sides vanish
        res.max_rel_error = std::max(res.max_rel_error, std::abs(analytic[p] - fd) / denom);
    }
    return res;
}

}  // namespace testutil

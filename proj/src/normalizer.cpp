#include "earlyguard/normalizer.hpp"

#include <cmath>

#include "earlyguard/errors.hpp"

namespace earlyguard {

Normalizer fit_normalizer(const LabeledDataset& train) {
    std::uint64_t count = 0;
    std::array<double, kNumFeatures> sum{};
    for (const auto& t : train.traces) {
        for (const auto& s : t.snapshots) {
            for (int i = 0; i < kNumFeatures; ++i) sum[static_cast<std::size_t>(i)] += s[i];
            ++count;
        }
    }
    if (count == 0) throw ValidationError("fit_normalizer: training set holds no snapshots");

    Normalizer n;
    n.fitted_on = count;
    for (int i = 0; i < kNumFeatures; ++i)
        n.mu[static_cast<std::size_t>(i)] = sum[static_cast<std::size_t>(i)] / static_cast<double>(count);

    // Second pass for the population variance.
    std::array<double, kNumFeatures> sq{};
    for (const auto& t : train.traces) {
        for (const auto& s : t.snapshots) {
            for (int i = 0; i < kNumFeatures; ++i) {
                const double d = s[i] - n.mu[static_cast<std::size_t>(i)];
                sq[static_cast<std::size_t>(i)] += d * d;
            }
        }
    }
    for (int i = 0; i < kNumFeatures; ++i) {
        const double var = sq[static_cast<std::size_t>(i)] / static_cast<double>(count);
        double sd = std::sqrt(var);
        // Constant feature: pin sigma to 1 so the standardized value is the
        // training mean, 0.
        const double tiny = 1e-12 * std::max(1.0, std::abs(n.mu[static_cast<std::size_t>(i)]));
        if (sd <= tiny) sd = 1.0;
        n.sigma[static_cast<std::size_t>(i)] = sd;
    }
    return n;
}

StdSequence apply_normalizer(const Normalizer& n, const BehaviorTrace& trace) {
    if (!n.fitted()) throw ValidationError("apply_normalizer: normalizer not fitted");
    StdSequence out(kNumFeatures, static_cast<Eigen::Index>(trace.snapshots.size()));
    for (std::size_t t = 0; t < trace.snapshots.size(); ++t)
        for (int i = 0; i < kNumFeatures; ++i)
            out(i, static_cast<Eigen::Index>(t)) =
                (trace.snapshots[t][i] - n.mu[static_cast<std::size_t>(i)]) / n.sigma[static_cast<std::size_t>(i)];
    return out;
}

StdSequence apply_normalizer_prefix(const Normalizer& n, const BehaviorTrace& trace, int t_seconds) {
    return apply_normalizer(n, truncate_to_time(trace, t_seconds));
}

}  // namespace earlyguard

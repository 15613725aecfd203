#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>

#include "earlyguard/trace.hpp"

namespace earlyguard {

/// Standardized input sequence: kNumFeatures rows, one column per second.
using StdSequence = Eigen::MatrixXd;

/// Per-feature standardization statistics fitted on training data.
/// Features are mapped to (x - mu) / sigma, so 0 is the training mean.
struct Normalizer {
    std::array<double, kNumFeatures> mu{};
    std::array<double, kNumFeatures> sigma{};  // > 0 once fitted
    std::uint64_t fitted_on = 0;               // number of snapshots used

    bool fitted() const { return fitted_on > 0; }
};

/// Mean and population standard deviation of each feature over every snapshot
/// of every trace in `train`. A feature that is constant across the whole
/// training set gets sigma = 1, so its standardized value is exactly 0.
/// Throws ValidationError if the dataset holds no snapshots.
Normalizer fit_normalizer(const LabeledDataset& train);

/// Standardizes a whole trace; column t is snapshot t.
StdSequence apply_normalizer(const Normalizer& n, const BehaviorTrace& trace);

/// Standardizes the first t_seconds+1 snapshots only.
StdSequence apply_normalizer_prefix(const Normalizer& n, const BehaviorTrace& trace, int t_seconds);

}  // namespace earlyguard

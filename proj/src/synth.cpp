#include "earlyguard/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "earlyguard/errors.hpp"
#include "earlyguard/rng.hpp"

namespace earlyguard {

namespace {

struct Baseline {
    double base;
    double trace_sd;   // per-trace personality offset
    double second_sd;  // per-second jitter
};

// Rough magnitudes of an idle virtualized desktop.
constexpr Baseline kBaselines[kNumFeatures] = {
    {4.0, 1.0, 1.5},          // cpu_system %
    {9.0, 2.0, 2.5},          // cpu_user %
    {300.0, 40.0, 60.0},      // packets_sent /s
    {2900.0, 250.0, 400.0},   // packets_received /s
    {4.0e5, 5.0e4, 8.0e4},    // bytes_sent /s
    {4.0e6, 4.0e5, 6.0e5},    // bytes_received /s
    {940.0, 4.0, 6.0},        // memory_mb
    {941.0, 3.0, 4.0},        // swap_mb
    {45.0, 0.8, 1.2},         // total_processes
    {3050.0, 30.0, 8.0},      // max_process_id
};

double clamp_feature(int feature, double v) {
    if (feature <= static_cast<int>(Feature::cpu_user)) return std::clamp(v, 0.0, 100.0);
    return std::max(v, 0.0);
}

bool is_count_feature(int feature) {
    switch (static_cast<Feature>(feature)) {
        case Feature::packets_sent:
        case Feature::packets_received:
        case Feature::bytes_sent:
        case Feature::bytes_received:
        case Feature::total_processes:
        case Feature::max_process_id:
            return true;
        default:
            return false;
    }
}

BehaviorTrace make_trace(const GeneratorSpec& spec, bool malicious, int index, Rng& rng) {
    BehaviorTrace tr;
    char id[16];
    std::snprintf(id, sizeof(id), "%c%04d", malicious ? 'm' : 'b', index);
    tr.sample_id = id;
    tr.label = malicious ? Label::malicious : Label::benign;
    tr.first_seen = rng.uniform_int(spec.first_seen_min, spec.first_seen_max - 1);

    bool late = false;
    int ramp_onset = 0;
    int payload_onset = 0;
    if (malicious) {
        late = rng.uniform() < spec.late_fraction;
        tr.family = late ? kFamilyLatePayload : kFamilyEarlyBurst;
        tr.variant = late ? (rng.bernoulli(0.5) ? "drift" : "lull") : (rng.bernoulli(0.5) ? "spark" : "ember");
        ramp_onset = static_cast<int>(rng.uniform_int(spec.ramp_onset_min, spec.ramp_onset_max));
        payload_onset = static_cast<int>(
            late ? rng.uniform_int(spec.late_payload_onset_min, spec.late_payload_onset_max)
                 : rng.uniform_int(spec.early_payload_onset_min, spec.early_payload_onset_max));
    }

    std::array<double, kNumFeatures> personality{};
    for (int i = 0; i < kNumFeatures; ++i)
        personality[static_cast<std::size_t>(i)] = rng.normal(0.0, kBaselines[i].trace_sd);

    double max_pid = kBaselines[static_cast<int>(Feature::max_process_id)].base +
                     personality[static_cast<std::size_t>(Feature::max_process_id)];

    tr.snapshots.reserve(static_cast<std::size_t>(spec.snapshots_per_trace));
    for (int t = 0; t < spec.snapshots_per_trace; ++t) {
        Snapshot s;
        for (int i = 0; i < kNumFeatures; ++i) {
            if (i == static_cast<int>(Feature::max_process_id)) continue;
            s[i] = kBaselines[i].base + personality[static_cast<std::size_t>(i)] +
                   rng.normal(0.0, kBaselines[i].second_sd);
        }
        // Process IDs only move upward.
        max_pid += std::max(0.0, 2.0 + rng.normal(0.0, kBaselines[static_cast<int>(Feature::max_process_id)].second_sd));

        if (malicious && t >= ramp_onset) {
            const double ramp =
                std::min(spec.ramp_processes_per_second * (t - ramp_onset + 1), spec.ramp_processes_cap);
            s[static_cast<int>(Feature::total_processes)] += ramp;
            max_pid += 11.0 * spec.ramp_processes_per_second;  // spawned processes consume IDs
        }
        if (malicious && t >= payload_onset && t < payload_onset + spec.payload_duration) {
            s[static_cast<int>(Feature::cpu_user)] += spec.payload_cpu_user + rng.normal(0.0, 4.0);
            s[static_cast<int>(Feature::cpu_system)] += spec.payload_cpu_system + rng.normal(0.0, 3.0);
            s[static_cast<int>(Feature::packets_sent)] *= spec.payload_packet_multiplier;
            s[static_cast<int>(Feature::packets_received)] *= 2.0;
            s[static_cast<int>(Feature::bytes_sent)] *= spec.payload_bytes_multiplier;
            s[static_cast<int>(Feature::bytes_received)] *= 3.0;
            s[static_cast<int>(Feature::memory_mb)] += spec.payload_memory_mb * (1.0 + 0.15 * (t - payload_onset));
        }
        s[static_cast<int>(Feature::max_process_id)] = max_pid;

        for (int i = 0; i < kNumFeatures; ++i) {
            s[i] = clamp_feature(i, s[i]);
            if (is_count_feature(i)) s[i] = std::round(s[i]);
        }
        tr.snapshots.push_back(s);
    }
    return tr;
}

}  // namespace

LabeledDataset synth_generate(const GeneratorSpec& spec, int count_benign, int count_malicious,
                              std::uint64_t seed) {
    if (count_benign < 0 || count_malicious < 0) throw ValidationError("synth_generate: negative counts");
    if (spec.snapshots_per_trace < 1) throw ValidationError("synth_generate: snapshots_per_trace must be >= 1");

    LabeledDataset d;
    d.role = DatasetRole::train;
    d.provenance = "synthetic";
    d.traces.reserve(static_cast<std::size_t>(count_benign + count_malicious));
    for (int i = 0; i < count_benign; ++i) {
        Rng rng(derive_seed(seed, 0, static_cast<std::uint64_t>(i)));
        d.traces.push_back(make_trace(spec, false, i, rng));
    }
    for (int i = 0; i < count_malicious; ++i) {
        Rng rng(derive_seed(seed, 1, static_cast<std::uint64_t>(i)));
        d.traces.push_back(make_trace(spec, true, i, rng));
    }
    return d;
}

}  // namespace earlyguard

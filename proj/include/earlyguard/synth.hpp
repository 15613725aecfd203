#pragma once

#include <cstdint>

#include "earlyguard/trace.hpp"

namespace earlyguard {

// Synthetic trace generator. This is NOT captured malware data: it produces
// plausible desk-scale stand-in traces so the whole pipeline can run and be
// tested end to end. Benign traces are noisy stationary baselines. Malicious
// traces share an early "delivery" ramp in process counts and then fire a
// payload burst (CPU + network + memory) whose onset time separates the two
// synthetic subfamilies:
//   early-burst   payload within the first few seconds
//   late-payload  payload only after late_payload_onset_min seconds
// Holding out late-payload simulates a family whose later behavior was never
// seen in training while the shared delivery ramp remains recognizable.
struct GeneratorSpec {
    int snapshots_per_trace = 21;

    double late_fraction = 0.3;  // share of malicious traces in the late-payload family

    // Shared delivery mechanism: process-count ramp.
    int ramp_onset_min = 1;
    int ramp_onset_max = 3;
    double ramp_processes_per_second = 3.0;
    double ramp_processes_cap = 60.0;

    // Payload burst windows per subfamily.
    int early_payload_onset_min = 2;
    int early_payload_onset_max = 4;
    int late_payload_onset_min = 8;
    int late_payload_onset_max = 12;
    int payload_duration = 5;

    // Payload magnitudes.
    double payload_cpu_user = 45.0;
    double payload_cpu_system = 18.0;
    double payload_packet_multiplier = 6.0;
    double payload_bytes_multiplier = 8.0;
    double payload_memory_mb = 160.0;

    // first_seen drawn uniformly from [first_seen_min, first_seen_max).
    std::int64_t first_seen_min = 1451606400;  // 2016-01-01T00:00:00Z
    std::int64_t first_seen_max = 1514764800;  // 2018-01-01T00:00:00Z
};

inline constexpr std::string_view kFamilyEarlyBurst = "early-burst";
inline constexpr std::string_view kFamilyLatePayload = "late-payload";

/// Deterministic for a given seed regardless of counts ordering; ids are
/// b0000.. / m0000.. All snapshot invariants hold on the output.
LabeledDataset synth_generate(const GeneratorSpec& spec, int count_benign, int count_malicious,
                              std::uint64_t seed);

}  // namespace earlyguard

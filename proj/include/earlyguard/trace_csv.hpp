#pragma once

#include <filesystem>
#include <iosfwd>

#include "earlyguard/trace.hpp"

namespace earlyguard {

// Trace CSV schema, one row per (sample, second):
//   sample_id,label,family,variant,first_seen,t,cpu_system,cpu_user,
//   packets_sent,packets_received,bytes_sent,bytes_received,memory_mb,
//   swap_mb,total_processes,max_process_id
// Rows of one sample are consecutive with t counting up from 0; first_seen is
// ISO-8601 UTC; label is benign|malicious; family/variant empty when unknown.
// UTF-8, LF line endings.

inline constexpr std::string_view kTraceCsvHeader =
    "sample_id,label,family,variant,first_seen,t,cpu_system,cpu_user,packets_sent,packets_received,"
    "bytes_sent,bytes_received,memory_mb,swap_mb,total_processes,max_process_id";

/// Parses a trace CSV. Malformed rows, non-contiguous t, duplicate
/// (sample_id, t), inconsistent per-sample metadata, and snapshot-invariant
/// violations raise ValidationError naming the line. A missing file raises
/// FileError.
LabeledDataset load_traces(const std::filesystem::path& path);
LabeledDataset load_traces(std::istream& in, const std::string& source_name);

/// Writes the canonical CSV form (doubles in shortest round-trip notation).
/// load_traces(save_traces(d)) reproduces every field bit-exactly.
void save_traces(const LabeledDataset& d, const std::filesystem::path& path);
void save_traces(const LabeledDataset& d, std::ostream& out);

}  // namespace earlyguard

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "earlyguard/normalizer.hpp"
#include "earlyguard/rng.hpp"
#include "earlyguard/trace.hpp"

namespace testutil {

namespace fs = std::filesystem;

/// Fresh directory under the system temp root, removed on destruction.
struct TmpDir {
    fs::path path;

    explicit TmpDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("earlyguard_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TmpDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TmpDir(const TmpDir&) = delete;
    TmpDir& operator=(const TmpDir&) = delete;

    fs::path operator/(const std::string& name) const { return path / name; }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
};

inline earlyguard::BehaviorTrace make_trace(const std::string& id, earlyguard::Label label,
                                            std::int64_t first_seen, int n_snapshots,
                                            std::uint64_t seed, const std::string& family = "",
                                            const std::string& variant = "") {
    earlyguard::Rng rng(seed);
    earlyguard::BehaviorTrace tr;
    tr.sample_id = id;
    tr.label = label;
    tr.family = family;
    tr.variant = variant;
    tr.first_seen = first_seen;
    for (int t = 0; t < n_snapshots; ++t) {
        earlyguard::Snapshot s;
        s[0] = rng.uniform(0.0, 40.0);
        s[1] = rng.uniform(0.0, 60.0);
        for (int i = 2; i < earlyguard::kNumFeatures; ++i) s[i] = rng.uniform(0.0, 1000.0);
        // A crude class signal so learned models have something to find.
        if (label == earlyguard::Label::malicious) s[8] += 500.0;
        tr.snapshots.push_back(s);
    }
    return tr;
}

inline earlyguard::LabeledDataset make_dataset(int benign, int malicious, int n_snapshots,
                                               std::uint64_t seed) {
    earlyguard::LabeledDataset d;
    for (int i = 0; i < benign; ++i)
        d.traces.push_back(make_trace("b" + std::to_string(i), earlyguard::Label::benign,
                                      1500000000 + i, n_snapshots, seed * 1000 + i));
    for (int i = 0; i < malicious; ++i)
        d.traces.push_back(make_trace("m" + std::to_string(i), earlyguard::Label::malicious,
                                      1500000000 + i, n_snapshots, seed * 2000 + i));
    return d;
}

/// Random standardized sequence, features x length.
inline earlyguard::StdSequence random_sequence(int length, std::uint64_t seed) {
    earlyguard::Rng rng(seed);
    earlyguard::StdSequence s(earlyguard::kNumFeatures, length);
    for (int t = 0; t < length; ++t)
        for (int i = 0; i < earlyguard::kNumFeatures; ++i) s(i, t) = rng.normal();
    return s;
}

}  // namespace testutil

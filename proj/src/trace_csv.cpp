#include "earlyguard/trace_csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "earlyguard/errors.hpp"
#include "earlyguard/fmt_util.hpp"
#include "earlyguard/time_util.hpp"

namespace earlyguard {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

double parse_double(std::string_view s, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError(where + ": bad numeric value '" + std::string(s) + "'");
    return v;
}

long parse_long(std::string_view s, const std::string& where) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError(where + ": bad integer value '" + std::string(s) + "'");
    return v;
}

void check_field_writable(const std::string& s, const char* name) {
    if (s.find_first_of(",\n\r") != std::string::npos)
        throw ValidationError(std::string("save_traces: ") + name + " '" + s + "' contains a CSV delimiter");
}

}  // namespace

LabeledDataset load_traces(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open trace file '" + path.string() + "'");
    return load_traces(in, path.string());
}

LabeledDataset load_traces(std::istream& in, const std::string& source_name) {
    LabeledDataset d;
    d.provenance = source_name;

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ValidationError(source_name + ": empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceCsvHeader)
        throw ValidationError(source_name + ":1: unexpected header (expected '" + std::string(kTraceCsvHeader) +
                              "')");

    std::unordered_set<std::string> closed_ids;
    BehaviorTrace* current = nullptr;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = source_name + ":" + std::to_string(lineno);

        const auto f = split_fields(line);
        if (f.size() != 16)
            throw ValidationError(where + ": expected 16 fields, got " + std::to_string(f.size()));

        const std::string sample_id(f[0]);
        if (sample_id.empty()) throw ValidationError(where + ": empty sample_id");
        const Label label = parse_label(f[1]);
        const std::string family(f[2]);
        const std::string variant(f[3]);
        const std::int64_t first_seen = parse_iso8601_utc(f[4]);
        const long t = parse_long(f[5], where);

        if (current == nullptr || current->sample_id != sample_id) {
            if (current != nullptr) closed_ids.insert(current->sample_id);
            if (closed_ids.count(sample_id))
                throw ValidationError(where + ": rows of sample '" + sample_id + "' are not consecutive");
            if (t != 0)
                throw ValidationError(where + ": sample '" + sample_id + "' starts at t=" + std::to_string(t) +
                                      ", expected 0");
            d.traces.push_back(BehaviorTrace{sample_id, label, family, variant, first_seen, {}});
            current = &d.traces.back();
        } else {
            const auto expected = static_cast<long>(current->snapshots.size());
            if (t != expected)
                throw ValidationError(where + ": sample '" + sample_id + "' has t=" + std::to_string(t) +
                                      ", expected contiguous t=" + std::to_string(expected));
            if (label != current->label || family != current->family || variant != current->variant ||
                first_seen != current->first_seen)
                throw ValidationError(where + ": sample '" + sample_id + "' changes metadata between rows");
        }

        Snapshot s;
        for (int i = 0; i < kNumFeatures; ++i)
            s[i] = parse_double(f[static_cast<std::size_t>(6 + i)], where);
        validate_snapshot(s, where + ": sample '" + sample_id + "'");
        current->snapshots.push_back(s);
    }

    if (d.traces.empty()) throw ValidationError(source_name + ": no trace rows");
    return d;
}

void save_traces(const LabeledDataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
    if (!out) throw FileError("cannot write trace file '" + path.string() + "'");
    save_traces(d, out);
    if (!out) throw FileError("write failed for '" + path.string() + "'");
}

void save_traces(const LabeledDataset& d, std::ostream& out) {
    out << kTraceCsvHeader << '\n';
    for (const auto& tr : d.traces) {
        check_field_writable(tr.sample_id, "sample_id");
        check_field_writable(tr.family, "family");
        check_field_writable(tr.variant, "variant");
        const std::string prefix = tr.sample_id + ',' + std::string(label_name(tr.label)) + ',' + tr.family + ',' +
                                   tr.variant + ',' + format_iso8601_utc(tr.first_seen) + ',';
        for (std::size_t t = 0; t < tr.snapshots.size(); ++t) {
            out << prefix << t;
            for (int i = 0; i < kNumFeatures; ++i) out << ',' << format_double(tr.snapshots[t][i]);
            out << '\n';
        }
    }
}

}  // namespace earlyguard

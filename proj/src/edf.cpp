#include "eegfeat/edf.hpp"

#include "eegfeat/error.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <vector>

namespace eegfeat {

namespace {

constexpr std::size_t kHeaderSize = 256;

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(' ');
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(' ');
    return std::string(s.substr(b, e - b + 1));
}

// Fixed-width ASCII field starting at `offset`.
std::string_view field(std::span<const unsigned char> bytes, std::size_t offset, std::size_t len) {
    if (offset + len > bytes.size())
        throw ParseError("EDF header truncated at byte offset " + std::to_string(offset));
    return {reinterpret_cast<const char*>(bytes.data()) + offset, len};
}

long parse_int_field(std::span<const unsigned char> bytes, std::size_t offset, std::size_t len,
                     const std::string& what) {
    std::string text = trim(field(bytes, offset, len));
    long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ParseError("EDF: non-numeric " + what + " field '" + text + "' at byte offset " +
                         std::to_string(offset));
    return value;
}

double parse_double_field(std::span<const unsigned char> bytes, std::size_t offset, std::size_t len,
                          const std::string& what) {
    std::string text = trim(field(bytes, offset, len));
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ParseError("EDF: non-numeric " + what + " field '" + text + "' at byte offset " +
                         std::to_string(offset));
    return value;
}

struct SignalHeader {
    std::string label;
    double physical_min = 0, physical_max = 0;
    double digital_min = 0, digital_max = 0;
    long samples_per_record = 0;
    bool annotation = false;
};

} // namespace

Recording parse_edf(std::span<const unsigned char> bytes, const std::string& source_path) {
    if (bytes.size() < kHeaderSize)
        throw ParseError("EDF: file shorter than the 256-byte header (got " +
                         std::to_string(bytes.size()) + " bytes)");

    // Main header layout: version(8) patient(80) recording(80) startdate(8)
    // starttime(8) header_bytes(8) reserved(44) num_records(8) duration(8)
    // num_signals(4).
    (void)field(bytes, 0, 8); // version, not interpreted
    long header_bytes = parse_int_field(bytes, 184, 8, "header byte count");
    long num_records = parse_int_field(bytes, 236, 8, "number of data records");
    double record_duration = parse_double_field(bytes, 244, 8, "record duration");
    long num_signals = parse_int_field(bytes, 252, 4, "number of signals");

    if (num_signals <= 0)
        throw ParseError("EDF: number of signals must be positive (byte offset 252)");
    if (record_duration <= 0.0)
        throw ParseError("EDF: record duration must be positive (byte offset 244)");
    std::size_t expected_header = kHeaderSize * (static_cast<std::size_t>(num_signals) + 1);
    if (header_bytes != static_cast<long>(expected_header))
        throw ParseError("EDF: header byte count " + std::to_string(header_bytes) +
                         " does not match 256*(ns+1)=" + std::to_string(expected_header) +
                         " (byte offset 184)");
    if (bytes.size() < expected_header)
        throw ParseError("EDF: file ends inside the signal headers at byte offset " +
                         std::to_string(bytes.size()));

    // Signal headers are field-major: all labels, then all transducers, ...
    const auto ns = static_cast<std::size_t>(num_signals);
    std::vector<SignalHeader> sig(ns);
    std::size_t off = kHeaderSize;
    for (std::size_t i = 0; i < ns; ++i, off += 16) {
        sig[i].label = trim(field(bytes, off, 16));
        sig[i].annotation = sig[i].label == "EDF Annotations";
    }
    off += ns * 80; // transducer type
    off += ns * 8;  // physical dimension
    for (std::size_t i = 0; i < ns; ++i, off += 8)
        sig[i].physical_min = parse_double_field(bytes, off, 8, "physical minimum");
    for (std::size_t i = 0; i < ns; ++i, off += 8)
        sig[i].physical_max = parse_double_field(bytes, off, 8, "physical maximum");
    for (std::size_t i = 0; i < ns; ++i, off += 8)
        sig[i].digital_min = parse_double_field(bytes, off, 8, "digital minimum");
    for (std::size_t i = 0; i < ns; ++i, off += 8)
        sig[i].digital_max = parse_double_field(bytes, off, 8, "digital maximum");
    off += ns * 80; // prefiltering
    for (std::size_t i = 0; i < ns; ++i, off += 8) {
        sig[i].samples_per_record = parse_int_field(bytes, off, 8, "samples per record");
        if (sig[i].samples_per_record <= 0)
            throw ParseError("EDF: samples per record must be positive for signal " +
                             std::to_string(i) + " (byte offset " + std::to_string(off) + ")");
    }

    std::size_t record_size = 0; // bytes, all signals including annotations
    for (const auto& s : sig) record_size += static_cast<std::size_t>(s.samples_per_record) * 2;

    std::size_t data_bytes = bytes.size() - expected_header;
    if (num_records < 0) {
        // Streaming convention: infer the count from the file length.
        if (data_bytes % record_size != 0)
            throw ParseError("EDF: truncated data record " + std::to_string(data_bytes / record_size) +
                             " (" + std::to_string(data_bytes % record_size) + " stray bytes)");
        num_records = static_cast<long>(data_bytes / record_size);
    } else if (data_bytes < static_cast<std::size_t>(num_records) * record_size) {
        throw ParseError("EDF: truncated data record " + std::to_string(data_bytes / record_size) +
                         " (header promises " + std::to_string(num_records) + " records)");
    }

    // Retained (non-annotation) signals must agree on rate.
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ns; ++i)
        if (!sig[i].annotation) keep.push_back(i);
    if (keep.empty()) throw ParseError("EDF: no signal channels (annotations only)");
    long spr = sig[keep.front()].samples_per_record;
    for (std::size_t i : keep)
        if (sig[i].samples_per_record != spr)
            throw ParseError("EDF: signals with differing sampling rates are not supported (signal " +
                             std::to_string(i) + " has " + std::to_string(sig[i].samples_per_record) +
                             " samples/record, expected " + std::to_string(spr) + ")");
    for (std::size_t i : keep)
        if (sig[i].digital_min == sig[i].digital_max)
            throw ParseError("EDF: digital_min equals digital_max for signal " + std::to_string(i) +
                             "; cannot scale to physical units");

    Recording rec;
    rec.sample_rate = static_cast<double>(spr) / record_duration;
    rec.meta.source_path = source_path;
    const auto n_c = static_cast<Eigen::Index>(keep.size());
    const auto total = static_cast<Eigen::Index>(num_records) * spr;
    rec.samples.resize(n_c, total);
    rec.channel_names.reserve(keep.size());
    for (std::size_t i : keep) rec.channel_names.push_back(sig[i].label);

    // Per-signal sample offset within one record, in samples.
    std::vector<std::size_t> sig_offset(ns, 0);
    {
        std::size_t acc = 0;
        for (std::size_t i = 0; i < ns; ++i) {
            sig_offset[i] = acc;
            acc += static_cast<std::size_t>(sig[i].samples_per_record);
        }
    }

    const unsigned char* data = bytes.data() + expected_header;
    for (long r = 0; r < num_records; ++r) {
        const unsigned char* rec_base = data + static_cast<std::size_t>(r) * record_size;
        for (Eigen::Index c = 0; c < n_c; ++c) {
            const auto& s = sig[keep[static_cast<std::size_t>(c)]];
            const double gain = (s.physical_max - s.physical_min) / (s.digital_max - s.digital_min);
            const unsigned char* p = rec_base + sig_offset[keep[static_cast<std::size_t>(c)]] * 2;
            for (long j = 0; j < spr; ++j) {
                auto raw = static_cast<std::uint16_t>(p[2 * j] | (p[2 * j + 1] << 8));
                auto dig = static_cast<double>(static_cast<std::int16_t>(raw));
                rec.samples(c, r * spr + j) = s.physical_min + (dig - s.digital_min) * gain;
            }
        }
    }

    rec.validate();
    return rec;
}

Recording read_edf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open EDF file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_edf(bytes, path);
}

} // namespace eegfeat

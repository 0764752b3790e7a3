#ifndef EEGFEAT_TESTS_EDF_WRITER_HPP
#define EEGFEAT_TESTS_EDF_WRITER_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace testsupport {

struct EdfSignal {
    std::string label = "EEG";
    double physical_min = -1000.0;
    double physical_max = 1000.0;
    int digital_min = -32768;
    int digital_max = 32767;
    long samples_per_record = 0;
    std::vector<std::int16_t> samples; // all records concatenated
};

inline void put_field(std::string& out, const std::string& text, std::size_t width) {
    std::string t = text.substr(0, width);
    t.resize(width, ' ');
    out += t;
}

inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Minimal EDF encoder for test fixtures: fixed-width ASCII headers
// (field-major signal block) followed by int16 little-endian data records.
inline std::string make_edf(const std::vector<EdfSignal>& signals, long num_records,
                            double record_duration) {
    std::string out;
    const std::size_t ns = signals.size();
    put_field(out, "0", 8);
    put_field(out, "test patient", 80);
    put_field(out, "test recording", 80);
    put_field(out, "01.01.24", 8);
    put_field(out, "00.00.00", 8);
    put_field(out, std::to_string(256 * (ns + 1)), 8);
    put_field(out, "", 44);
    put_field(out, std::to_string(num_records), 8);
    put_field(out, fmt_num(record_duration), 8);
    put_field(out, std::to_string(ns), 4);

    for (const auto& s : signals) put_field(out, s.label, 16);
    for (std::size_t i = 0; i < ns; ++i) put_field(out, "", 80); // transducer
    for (std::size_t i = 0; i < ns; ++i) put_field(out, "uV", 8);
    for (const auto& s : signals) put_field(out, fmt_num(s.physical_min), 8);
    for (const auto& s : signals) put_field(out, fmt_num(s.physical_max), 8);
    for (const auto& s : signals) put_field(out, std::to_string(s.digital_min), 8);
    for (const auto& s : signals) put_field(out, std::to_string(s.digital_max), 8);
    for (std::size_t i = 0; i < ns; ++i) put_field(out, "", 80); // prefiltering
    for (const auto& s : signals) put_field(out, std::to_string(s.samples_per_record), 8);
    for (std::size_t i = 0; i < ns; ++i) put_field(out, "", 32); // reserved

    for (long r = 0; r < num_records; ++r) {
        for (const auto& s : signals) {
            for (long j = 0; j < s.samples_per_record; ++j) {
                const std::size_t k = static_cast<std::size_t>(r * s.samples_per_record + j);
                const std::int16_t v = k < s.samples.size() ? s.samples[k] : std::int16_t(0);
                const auto u = static_cast<std::uint16_t>(v);
                out.push_back(static_cast<char>(u & 0xff));
                out.push_back(static_cast<char>((u >> 8) & 0xff));
            }
        }
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace testsupport

#endif

#include "eegfeat/csv.hpp"

#include "eegfeat/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <vector>

namespace eegfeat {

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view next_line(std::string_view& rest) {
    std::size_t nl = rest.find('\n');
    std::string_view line;
    if (nl == std::string_view::npos) {
        line = rest;
        rest = {};
    } else {
        line = rest.substr(0, nl);
        rest.remove_prefix(nl + 1);
    }
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

} // namespace

Recording parse_csv(std::string_view text, double sample_rate, const std::string& source_path) {
    if (!(sample_rate > 0.0)) throw ParamError("sample rate must be positive");

    std::string_view rest = text;
    std::string_view header = next_line(rest);
    if (header.empty()) throw ParseError("CSV: empty header row");
    auto names = split_line(header);
    const auto n_c = names.size();

    std::vector<double> values; // row-major (sample-major)
    std::size_t row = 0;
    while (!rest.empty()) {
        std::string_view line = next_line(rest);
        if (line.empty()) continue; // tolerate blank/trailing lines
        ++row;
        auto cells = split_line(line);
        if (cells.size() != n_c)
            throw ParseError("CSV: ragged row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " cells, expected " + std::to_string(n_c));
        for (std::size_t c = 0; c < n_c; ++c) {
            double v = 0.0;
            auto cell = cells[c];
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size())
                throw ParseError("CSV: non-numeric cell at row " + std::to_string(row) + ", column " +
                                 std::to_string(c + 1) + ": '" + std::string(cell) + "'");
            values.push_back(v);
        }
    }
    if (row == 0) throw ParseError("CSV: no samples");

    Recording rec;
    rec.sample_rate = sample_rate;
    rec.meta.source_path = source_path;
    for (auto n : names) rec.channel_names.emplace_back(n);
    rec.samples.resize(static_cast<Eigen::Index>(n_c), static_cast<Eigen::Index>(row));
    for (std::size_t t = 0; t < row; ++t)
        for (std::size_t c = 0; c < n_c; ++c)
            rec.samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = values[t * n_c + c];

    rec.validate();
    return rec;
}

Recording read_csv(const std::string& path, double sample_rate) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open CSV file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_csv(text, sample_rate, path);
}

void write_csv(const Recording& rec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write CSV file: " + path);
    for (std::size_t c = 0; c < rec.channel_names.size(); ++c) {
        if (c) out << ',';
        out << rec.channel_names[c];
    }
    out << '\n';
    char buf[32];
    for (Eigen::Index t = 0; t < rec.length(); ++t) {
        for (Eigen::Index c = 0; c < rec.channels(); ++c) {
            if (c) out << ',';
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, rec.samples(c, t));
            out.write(buf, ptr - buf);
            (void)ec;
        }
        out << '\n';
    }
}

} // namespace eegfeat

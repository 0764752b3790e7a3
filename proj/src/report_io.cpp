#include "eegfeat/experiments.hpp"

#include "eegfeat/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

namespace eegfeat {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    return out;
}

std::string join_channels(const std::vector<int>& channels) {
    std::string s;
    for (size_t i = 0; i < channels.size(); ++i) {
        if (i) s += "+";
        s += std::to_string(channels[i]);
    }
    return s;
}

json cell_json(const CellDetail& cell) {
    return json{{"feature_set", cell.feature_set}, {"experiment", cell.experiment},
                {"subject", cell.subject},         {"setting", cell.setting},
                {"setting_value", cell.setting_value}, {"values", cell.values},
                {"mean", cell.mean()},             {"stderr", cell.se()}};
}

// Percentile with linear interpolation between order statistics.
double percentile(std::vector<double> v, double frac) {
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v.front();
    const double pos = frac * static_cast<double>(v.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - t) + v[hi] * t;
}

std::string slug(std::string s) {
    for (char& c : s)
        if (c == '+') c = 'p';
    return s;
}

} // namespace

void write_report_csv(const Report& report, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "feature_set,experiment,subject,setting,n_seeds,mean,stderr\n";
    for (const CellDetail& cell : report.cells)
        out << cell.feature_set << ',' << cell.experiment << ',' << cell.subject << ','
            << cell.setting << ',' << cell.values.size() << ',' << format_double(cell.mean())
            << ',' << format_double(cell.se()) << '\n';
}

void write_report_json(const Report& report, const std::string& path) {
    json doc;
    doc["experiment"] = report.experiment;
    doc["config_hash"] = report.config_hash;
    doc["seed"] = report.seed;
    doc["cells"] = json::array();
    for (const CellDetail& cell : report.cells) doc["cells"].push_back(cell_json(cell));
    if (!report.ranges.empty()) {
        doc["ranges"] = json::array();
        for (const TransferRange& range : report.ranges)
            doc["ranges"].push_back(json{{"feature_set", range.feature_set},
                                         {"target", range.target},
                                         {"q", range.q},
                                         {"min", range.min},
                                         {"mean", range.mean},
                                         {"max", range.max}});
    }
    doc["warnings"] = report.warnings;
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

void write_plot_data(const Report& report, const std::string& dir) {
    namespace fs = std::filesystem;
    std::map<std::string, std::vector<const CellDetail*>> curves;
    std::map<std::string, std::vector<const CellDetail*>> per_subject;
    for (const CellDetail& cell : report.cells)
        (cell.subject == "ALL" ? curves : per_subject)[cell.feature_set].push_back(&cell);

    for (auto& [fs_name, cells] : curves) {
        std::sort(cells.begin(), cells.end(), [](const CellDetail* a, const CellDetail* b) {
            return a->setting_value < b->setting_value;
        });
        std::ofstream out =
            open_out((fs::path(dir) / ("plot_curve_" + report.experiment + "_" + slug(fs_name) + ".csv")).string());
        out << "x,y,band_lo,band_hi\n";
        for (const CellDetail* cell : cells) {
            const double m = cell->mean();
            const double se = cell->se();
            out << format_double(cell->setting_value) << ',' << format_double(m) << ','
                << format_double(m - se) << ',' << format_double(m + se) << '\n';
        }
    }

    if (report.experiment == "in-session") {
        for (auto& [fs_name, cells] : per_subject) {
            double top = -1.0;
            for (const CellDetail* cell : cells) top = std::max(top, cell->setting_value);
            std::ofstream out =
                open_out((fs::path(dir) / ("plot_hist_" + slug(fs_name) + ".csv")).string());
            out << "subject,value\n";
            for (const CellDetail* cell : cells) {
                if (cell->setting_value != top) continue;
                for (double v : cell->values)
                    out << cell->subject << ',' << format_double(v) << '\n';
            }
        }
    }

    if (!report.ranges.empty()) {
        std::map<std::string, std::vector<const TransferRange*>> by_set;
        for (const TransferRange& range : report.ranges) by_set[range.feature_set].push_back(&range);
        for (auto& [fs_name, ranges] : by_set) {
            std::ofstream out =
                open_out((fs::path(dir) / ("plot_transfer_range_" + slug(fs_name) + ".csv")).string());
            out << "target,q,min,mean,max\n";
            for (const TransferRange* range : ranges)
                out << range->target << ',' << format_double(range->q) << ','
                    << format_double(range->min) << ',' << format_double(range->mean) << ','
                    << format_double(range->max) << '\n';
        }
    }
}

void write_subset_csv(const SubsetReport& report, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "feature_set,channels,size,mean\n";
    for (const SubsetResult& subset : report.subsets)
        out << report.feature_set << ',' << join_channels(subset.channels) << ','
            << subset.channels.size() << ',' << format_double(subset.mean) << '\n';
}

void write_subset_json(const SubsetReport& report, const ImportanceReport& importance,
                       const std::string& path) {
    json doc;
    doc["feature_set"] = report.feature_set;
    doc["config_hash"] = report.config_hash;
    doc["seed"] = report.seed;
    doc["subsets"] = json::array();
    for (const SubsetResult& subset : report.subsets) {
        json row{{"channels", subset.channels}, {"mean", subset.mean}};
        json per_subject = json::array();
        for (double v : subset.per_subject) {
            if (std::isnan(v))
                per_subject.push_back(nullptr);
            else
                per_subject.push_back(v);
        }
        row["per_subject"] = std::move(per_subject);
        doc["subsets"].push_back(std::move(row));
    }
    doc["skipped"] = report.skipped;
    doc["warnings"] = report.warnings;
    json imp;
    imp["channels"] = json::array();
    for (const ChannelScore& ch : importance.channels)
        imp["channels"].push_back(json{{"channel", ch.channel}, {"score", ch.score}, {"rank", ch.rank}});
    imp["pairs"] = json::array();
    for (const PairScore& pair : importance.pairs)
        imp["pairs"].push_back(
            json{{"a", pair.a}, {"b", pair.b}, {"score", pair.score}, {"rank", pair.rank}});
    imp["warnings"] = importance.warnings;
    doc["importance"] = std::move(imp);
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

void write_subset_plot_data(const SubsetReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    std::map<size_t, std::vector<double>> by_size;
    for (const SubsetResult& subset : report.subsets)
        by_size[subset.channels.size()].push_back(subset.mean);
    std::ofstream out = open_out((fs::path(dir) / "plot_subset_sizes.csv").string());
    out << "size,mean,p5,p95\n";
    for (const auto& [size, means] : by_size) {
        double sum = 0.0;
        for (double v : means) sum += v;
        out << size << ',' << format_double(sum / static_cast<double>(means.size())) << ','
            << format_double(percentile(means, 0.05)) << ',' << format_double(percentile(means, 0.95))
            << '\n';
    }
}

} // namespace eegfeat

#include "eegfeat/config.hpp"

#include "eegfeat/csv.hpp"
#include "eegfeat/edf.hpp"
#include "eegfeat/error.hpp"
#include "eegfeat/parallel.hpp"
#include "eegfeat/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace eegfeat {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& prefix,
                  const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown config key: " + (prefix.empty() ? it.key() : prefix + "." + it.key()));
}

template <typename T>
T get_as(const json& obj, const std::string& prefix, const char* key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key " + (prefix.empty() ? std::string(key) : prefix + "." + key) +
                          " has the wrong type");
    }
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

BandSet parse_bands(const json& arr) {
    BandSet set;
    for (const json& b : arr) {
        if (!b.is_object()) throw ConfigError("bands[] entries must be objects");
        require_keys(b, "bands[]", {"name", "low_hz", "high_hz"});
        Band band;
        band.name = get_as<std::string>(b, "bands[]", "name", "");
        if (band.name.empty()) throw ConfigError("bands[] entry is missing a name");
        if (!b.contains("low_hz") || !b.contains("high_hz"))
            throw ConfigError("band " + band.name + " needs low_hz and high_hz");
        band.low_hz = get_as<double>(b, "bands[]", "low_hz", 0.0);
        band.high_hz = get_as<double>(b, "bands[]", "high_hz", 0.0);
        set.bands.push_back(std::move(band));
    }
    set.validate();
    return set;
}

Matrix parse_correlation(const json& j, const std::string& prefix, int n_channels) {
    if (j.is_string()) {
        if (j.get<std::string>() == "identity") return Matrix::Identity(n_channels, n_channels);
        throw ConfigError(prefix + ": unknown correlation keyword (use \"identity\")");
    }
    if (j.is_object()) {
        require_keys(j, prefix, {"planted"});
        const json& planted = j.at("planted");
        require_keys(planted, prefix + ".planted", {"channels", "rho"});
        std::vector<int> members = get_as<std::vector<int>>(planted, prefix, "channels", {});
        const double rho = get_as<double>(planted, prefix, "rho", 0.0);
        return planted_correlation(n_channels, members, rho);
    }
    if (j.is_array()) {
        Matrix m(n_channels, n_channels);
        if (static_cast<int>(j.size()) != n_channels)
            throw ConfigError(prefix + ": correlation matrix must be " + std::to_string(n_channels) +
                              " rows");
        for (int r = 0; r < n_channels; ++r) {
            const json& row = j[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<int>(row.size()) != n_channels)
                throw ConfigError(prefix + ": correlation row " + std::to_string(r) + " has wrong length");
            for (int c = 0; c < n_channels; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
        return m;
    }
    throw ConfigError(prefix + ": correlation must be \"identity\", a planted spec, or a matrix");
}

SynthClassSpec parse_class_spec(const json& j, const std::string& prefix, int n_channels,
                                const BandSet& bands) {
    require_keys(j, prefix, {"band_amplitudes", "correlation"});
    const int n_bands = bands.size();
    SynthClassSpec spec;
    spec.band_amplitudes.assign(static_cast<std::size_t>(n_bands), 1.0);
    if (j.contains("band_amplitudes")) {
        const json& amps = j.at("band_amplitudes");
        if (amps.is_array()) {
            if (static_cast<int>(amps.size()) != n_bands)
                throw ConfigError(prefix + ".band_amplitudes needs " + std::to_string(n_bands) +
                                  " entries, one per band");
            for (int b = 0; b < n_bands; ++b)
                spec.band_amplitudes[static_cast<std::size_t>(b)] =
                    amps[static_cast<std::size_t>(b)].get<double>();
        } else if (amps.is_object()) {
            for (const auto& [name, value] : amps.items()) {
                int b = 0;
                while (b < n_bands && bands.bands[static_cast<std::size_t>(b)].name != name) ++b;
                if (b == n_bands)
                    throw ConfigError(prefix + ".band_amplitudes names unknown band: " + name);
                if (!value.is_number())
                    throw ConfigError(prefix + ".band_amplitudes." + name + " must be a number");
                spec.band_amplitudes[static_cast<std::size_t>(b)] = value.get<double>();
            }
        } else {
            throw ConfigError(prefix + ".band_amplitudes must be an array or a band-name map");
        }
    }
    if (j.contains("correlation"))
        spec.correlation = parse_correlation(j.at("correlation"), prefix + ".correlation", n_channels);
    else
        spec.correlation = Matrix::Identity(n_channels, n_channels);
    return spec;
}

} // namespace

nlohmann::json pipeline_to_json(const PipelineConfig& cfg) {
    json bands = json::array();
    for (const Band& b : cfg.bands.bands)
        bands.push_back(json{{"name", b.name}, {"low_hz", b.low_hz}, {"high_hz", b.high_hz}});
    return json{{"filter", json{{"high_pass_hz", cfg.high_pass_hz}, {"low_pass_hz", cfg.low_pass_hz}}},
                {"window", json{{"seconds", cfg.window_seconds},
                                {"overlap_seconds", cfg.window_overlap_seconds}}},
                {"bands", std::move(bands)},
                {"psd", json{{"segment_samples", cfg.psd.segment_samples},
                             {"overlap", cfg.psd.overlap},
                             {"taper", cfg.psd.taper}}},
                {"forest", json{{"n_trees", cfg.forest.n_trees},
                                {"max_depth", cfg.forest.max_depth},
                                {"min_samples_split", cfg.forest.min_samples_split},
                                {"min_samples_leaf", cfg.forest.min_samples_leaf},
                                {"max_features", cfg.forest.max_features}}}};
}

PipelineConfig pipeline_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    if (j.contains("filter")) {
        const json& f = j.at("filter");
        cfg.high_pass_hz = get_as<double>(f, "filter", "high_pass_hz", cfg.high_pass_hz);
        cfg.low_pass_hz = get_as<double>(f, "filter", "low_pass_hz", cfg.low_pass_hz);
    }
    if (j.contains("window")) {
        const json& w = j.at("window");
        cfg.window_seconds = get_as<double>(w, "window", "seconds", cfg.window_seconds);
        cfg.window_overlap_seconds =
            get_as<double>(w, "window", "overlap_seconds", cfg.window_overlap_seconds);
    }
    if (j.contains("bands")) cfg.bands = parse_bands(j.at("bands"));
    if (j.contains("psd")) {
        const json& p = j.at("psd");
        cfg.psd.segment_samples = get_as<int>(p, "psd", "segment_samples", cfg.psd.segment_samples);
        cfg.psd.overlap = get_as<double>(p, "psd", "overlap", cfg.psd.overlap);
        cfg.psd.taper = get_as<std::string>(p, "psd", "taper", cfg.psd.taper);
    }
    if (j.contains("forest")) {
        const json& f = j.at("forest");
        cfg.forest.n_trees = get_as<int>(f, "forest", "n_trees", cfg.forest.n_trees);
        cfg.forest.max_depth = get_as<int>(f, "forest", "max_depth", cfg.forest.max_depth);
        cfg.forest.min_samples_split =
            get_as<int>(f, "forest", "min_samples_split", cfg.forest.min_samples_split);
        cfg.forest.min_samples_leaf =
            get_as<int>(f, "forest", "min_samples_leaf", cfg.forest.min_samples_leaf);
        cfg.forest.max_features = get_as<int>(f, "forest", "max_features", cfg.forest.max_features);
    }
    return cfg;
}

CliConfig parse_config(const std::string& json_text, const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    require_keys(doc, "",
                 {"manifest", "output_dir", "features", "filter", "window", "bands", "psd", "forest",
                  "experiment", "synth"});

    CliConfig cfg;
    cfg.base_dir = base_dir;
    cfg.manifest = get_as<std::string>(doc, "", "manifest", "");
    cfg.output_dir = get_as<std::string>(doc, "", "output_dir", cfg.output_dir);

    if (doc.contains("filter")) require_keys(doc.at("filter"), "filter", {"high_pass_hz", "low_pass_hz"});
    if (doc.contains("window")) require_keys(doc.at("window"), "window", {"seconds", "overlap_seconds"});
    if (doc.contains("psd")) require_keys(doc.at("psd"), "psd", {"segment_samples", "overlap", "taper"});
    if (doc.contains("forest"))
        require_keys(doc.at("forest"), "forest",
                     {"n_trees", "max_depth", "min_samples_split", "min_samples_leaf", "max_features"});
    cfg.pipeline = pipeline_from_json(doc);

    if (doc.contains("features")) {
        std::vector<std::string> names;
        if (doc.at("features").is_string())
            names.push_back(doc.at("features").get<std::string>());
        else
            names = get_as<std::vector<std::string>>(doc, "", "features", {});
        if (names.empty()) throw ConfigError("features must name at least one feature set");
        cfg.features.clear();
        for (const std::string& name : names) cfg.features.push_back(parse_feature_set(name));
    }

    if (doc.contains("experiment")) {
        const json& e = doc.at("experiment");
        require_keys(e, "experiment",
                     {"fractions", "ratios", "transfer_fractions", "splits", "subset_splits", "seed",
                      "block_split", "transfer_mode", "subset_channels", "subset_feature_set",
                      "importance_sizes"});
        ExperimentSettings& s = cfg.experiment;
        s.fractions = get_as<std::vector<double>>(e, "experiment", "fractions", s.fractions);
        s.ratios = get_as<std::vector<double>>(e, "experiment", "ratios", s.ratios);
        s.transfer_fractions =
            get_as<std::vector<double>>(e, "experiment", "transfer_fractions", s.transfer_fractions);
        s.splits = get_as<int>(e, "experiment", "splits", s.splits);
        s.subset_splits = get_as<int>(e, "experiment", "subset_splits", s.subset_splits);
        s.seed = get_as<std::uint64_t>(e, "experiment", "seed", s.seed);
        s.block_split = get_as<bool>(e, "experiment", "block_split", s.block_split);
        s.transfer_mode = get_as<std::string>(e, "experiment", "transfer_mode", s.transfer_mode);
        s.subset_channels = get_as<std::vector<int>>(e, "experiment", "subset_channels", s.subset_channels);
        s.importance_sizes = get_as<std::vector<int>>(e, "experiment", "importance_sizes", s.importance_sizes);
        if (e.contains("subset_feature_set"))
            cfg.subset_feature_set =
                parse_feature_set(get_as<std::string>(e, "experiment", "subset_feature_set", "tsg+bf"));
    }

    if (doc.contains("synth")) {
        const json& sj = doc.at("synth");
        require_keys(sj, "synth",
                     {"n_subjects", "n_channels", "sample_rate", "seconds_per_class", "n_sessions",
                      "seed", "noise_floor", "class0", "class1"});
        SynthParams sp;
        sp.bands = cfg.pipeline.bands;
        sp.n_subjects = get_as<int>(sj, "synth", "n_subjects", sp.n_subjects);
        sp.n_channels = get_as<int>(sj, "synth", "n_channels", sp.n_channels);
        sp.sample_rate = get_as<double>(sj, "synth", "sample_rate", sp.sample_rate);
        sp.seconds_per_class = get_as<double>(sj, "synth", "seconds_per_class", sp.seconds_per_class);
        sp.n_sessions = get_as<int>(sj, "synth", "n_sessions", sp.n_sessions);
        sp.seed = get_as<std::uint64_t>(sj, "synth", "seed", sp.seed);
        sp.noise_floor = get_as<double>(sj, "synth", "noise_floor", sp.noise_floor);
        const int n_bands = sp.bands.size();
        sp.class0 = sj.contains("class0")
                        ? parse_class_spec(sj.at("class0"), "synth.class0", sp.n_channels, sp.bands)
                        : uniform_spec(sp.n_channels, n_bands);
        sp.class1 = sj.contains("class1")
                        ? parse_class_spec(sj.at("class1"), "synth.class1", sp.n_channels, sp.bands)
                        : uniform_spec(sp.n_channels, n_bands);
        cfg.synth = std::move(sp);
    }

    cfg.config_hash = hash_hex(fnv1a(doc.dump()));
    return cfg;
}

CliConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::filesystem::path(path).parent_path().string());
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open manifest file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("manifest " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_array()) throw ParseError("manifest " + path + " must be a JSON array");
    const std::filesystem::path dir = std::filesystem::path(path).parent_path();
    std::vector<ManifestEntry> entries;
    for (const json& item : doc) {
        if (!item.is_object()) throw ParseError("manifest entries must be objects");
        for (auto it = item.begin(); it != item.end(); ++it)
            if (it.key() != "path" && it.key() != "subject" && it.key() != "session" &&
                it.key() != "label" && it.key() != "sample_rate")
                throw ParseError("manifest entry has unknown key: " + it.key());
        ManifestEntry entry;
        try {
            entry.path = item.value("path", std::string{});
            if (entry.path.empty()) throw ParseError("manifest entry is missing its path");
            std::filesystem::path p(entry.path);
            if (p.is_relative()) entry.path = (dir / p).string();
            entry.subject = item.value("subject", std::string{});
            if (entry.subject.empty())
                throw ParseError("manifest entry " + entry.path + " has no subject");
            entry.session = item.value("session", entry.session);
            if (item.contains("label") && !item.at("label").is_null())
                entry.label = item.at("label").get<int>();
            if (item.contains("sample_rate")) entry.sample_rate = item.at("sample_rate").get<double>();
        } catch (const json::exception& e) {
            throw ParseError("manifest entry has a wrong-typed field: " + std::string(e.what()));
        }
        entries.push_back(std::move(entry));
    }
    if (entries.empty()) throw ParseError("manifest " + path + " lists no recordings");
    return entries;
}

Recording load_recording(const ManifestEntry& entry) {
    if (!std::filesystem::exists(entry.path))
        throw Error("dataset file does not exist: " + entry.path);
    const std::string ext = std::filesystem::path(entry.path).extension().string();
    Recording rec;
    if (ext == ".edf" || ext == ".EDF") {
        rec = read_edf(entry.path);
    } else if (ext == ".csv" || ext == ".CSV") {
        if (!entry.sample_rate)
            throw ParseError("manifest entry " + entry.path + " is a CSV and needs a sample_rate");
        rec = read_csv(entry.path, *entry.sample_rate);
    } else {
        throw ParseError("unsupported recording format: " + entry.path + " (use .edf or .csv)");
    }
    rec.meta.subject = entry.subject;
    rec.meta.session = entry.session;
    rec.meta.label = entry.label;
    rec.meta.source_path = entry.path;
    rec.validate();
    return rec;
}

std::vector<Recording> load_recordings(const std::vector<ManifestEntry>& entries, int jobs) {
    std::vector<Recording> recs(entries.size());
    parallel_for(entries.size(), jobs, [&](std::size_t i) { recs[i] = load_recording(entries[i]); });
    return recs;
}

} // namespace eegfeat

#ifndef EEGFEAT_CONFIG_HPP
#define EEGFEAT_CONFIG_HPP

#include "eegfeat/experiments.hpp"
#include "eegfeat/synth.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace eegfeat {

struct CliConfig {
    std::string manifest;
    std::string output_dir = "out";
    std::vector<FeatureSet> features = {FeatureSet::Tsg, FeatureSet::Bf, FeatureSet::TsgBf};
    FeatureSet subset_feature_set = FeatureSet::TsgBf;
    PipelineConfig pipeline;
    ExperimentSettings experiment;
    std::optional<SynthParams> synth;
    std::string config_hash; // 16 hex chars over the canonical parsed JSON
    std::string base_dir;    // directory of the config file, for relative paths
};

// Strict parse: any key outside the schema raises ConfigError naming it.
CliConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
CliConfig load_config_file(const std::string& path);

nlohmann::json pipeline_to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_from_json(const nlohmann::json& j);

struct ManifestEntry {
    std::string path; // resolved against the manifest's directory
    std::string subject;
    std::string session = "session0";
    std::optional<int> label;
    std::optional<double> sample_rate; // required for CSV recordings
};

std::vector<ManifestEntry> load_manifest(const std::string& path);
Recording load_recording(const ManifestEntry& entry);
std::vector<Recording> load_recordings(const std::vector<ManifestEntry>& entries, int jobs = 1);

} // namespace eegfeat

#endif

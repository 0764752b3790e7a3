#ifndef EEGFEAT_EXPERIMENTS_HPP
#define EEGFEAT_EXPERIMENTS_HPP

#include "eegfeat/bandpower.hpp"
#include "eegfeat/forest.hpp"
#include "eegfeat/graphcore.hpp"
#include "eegfeat/rng.hpp"
#include "eegfeat/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eegfeat {

enum class FeatureSet { Tsg, Bf, TsgBf };

std::string feature_set_name(FeatureSet set);
FeatureSet parse_feature_set(const std::string& name);

enum class Metric { Balanced, Standard };

// Shared preprocessing and model hyperparameters.
struct PipelineConfig {
    double high_pass_hz = 0.5;
    double low_pass_hz = 30.0;
    double window_seconds = 2.5;
    double window_overlap_seconds = 0.0;
    BandSet bands = BandSet::default_eeg();
    PsdParams psd;
    ForestParams forest;
};

struct ExperimentSettings {
    std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    std::vector<double> ratios = {0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0};
    std::vector<double> transfer_fractions = {0.0,  0.05, 0.1,  0.15, 0.2,  0.25, 0.3,  0.35, 0.4,
                                              0.45, 0.5,  0.55, 0.6,  0.65, 0.7,  0.75, 0.8};
    int splits = 45;
    int subset_splits = 30;
    std::uint64_t seed = 42;
    bool block_split = false;
    std::string transfer_mode = "cross-subject"; // or "cross-session"
    std::vector<int> subset_channels = {3, 4, 5, 6, 7, 8, 13, 14, 18, 19};
    std::vector<int> importance_sizes = {4, 6, 8};
};

// Everything the protocols need per subject, computed once: correlation
// graphs and raw band features per window, so a train/test split only has to
// slice, refit the cheap tail (SVD, PCA, forest), and score.
struct SubjectCache {
    std::string id;
    GraphSeries graphs;
    Matrix band_feats; // n_w x (n_c * I), simplex rows per channel
    std::vector<int> labels;
    std::vector<int> session_of; // index into sessions, per window
    std::vector<std::string> sessions;

    int size() const { return graphs.size(); }
};

struct DatasetCache {
    std::vector<SubjectCache> subjects;
    double sample_rate = 0.0;
    int n_channels = 0;
};

// Filter + window + per-window graph/band-feature precomputation, grouped by
// subject (sorted by id). Recordings must agree on sample rate and channel
// count and carry labels.
DatasetCache build_cache(const std::vector<Recording>& recordings, const PipelineConfig& cfg,
                         int jobs = 1);

// Restriction of a cache to a channel subset: graphs become principal
// submatrices, band features keep the selected channels' column blocks.
SubjectCache restrict_cache(const SubjectCache& cache, const std::vector<int>& channels, int n_bands);

// Feature maps fitted on one training index set.
struct FittedFeatures {
    FeatureSet set = FeatureSet::Tsg;
    std::optional<TsgModel> tsg;
    std::optional<BfModel> bf;
    Matrix train_features; // training windows in index order
};

FittedFeatures fit_features(FeatureSet set, const SubjectCache& cache, const std::vector<int>& train_idx);

Matrix embed_features(const FittedFeatures& fitted, const SubjectCache& cache, const std::vector<int>& idx);

// One train/test partition. Retries draws from `rng` until both sides hold
// both classes (up to 100 attempts); nullopt when that never happens.
struct SplitIndices {
    std::vector<int> train;
    std::vector<int> test;
};
std::optional<SplitIndices> make_split(const std::vector<int>& labels, double train_fraction, Rng& rng,
                                       bool block_split);

// One report cell: the raw per-seed (or per-source) values plus identity.
struct CellDetail {
    std::string feature_set;
    std::string experiment;
    std::string subject; // "ALL" for the cross-subject aggregate
    std::string setting; // "p=0.8", "r=0.125", "q=0.05", "channels=3+4"
    double setting_value = 0.0;
    std::vector<double> values;

    double mean() const;
    double se() const; // sample std (ddof = 1) / sqrt(n)
};

struct TransferRange {
    std::string feature_set;
    std::string target;
    double q = 0.0;
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

struct Report {
    std::string experiment;
    std::vector<CellDetail> cells;
    std::vector<TransferRange> ranges; // cross-subject transfer only
    std::vector<std::string> warnings;
    std::string config_hash;
    std::uint64_t seed = 0;
};

Report run_in_session(const DatasetCache& data, const PipelineConfig& cfg,
                      const ExperimentSettings& settings, const std::vector<FeatureSet>& sets,
                      int jobs = 1);

Report run_nonconstant_querying(const DatasetCache& data, const PipelineConfig& cfg,
                                const ExperimentSettings& settings, const std::vector<FeatureSet>& sets,
                                int jobs = 1);

Report run_transfer(const DatasetCache& data, const PipelineConfig& cfg,
                    const ExperimentSettings& settings, const std::vector<FeatureSet>& sets,
                    int jobs = 1);

struct SubsetResult {
    std::vector<int> channels;
    double mean = 0.0;
    std::vector<double> per_subject; // subject means, cache order
};

struct SubsetReport {
    std::string feature_set;
    std::vector<SubsetResult> subsets;
    std::vector<std::string> skipped; // "3" for a skipped singleton, with reason
    std::vector<std::string> warnings;
    std::string config_hash;
    std::uint64_t seed = 0;
};

// In-session protocol (fixed p = 0.8, subset_splits splits, standard
// accuracy) re-run for every nonempty subset of settings.subset_channels.
SubsetReport run_subset_search(const DatasetCache& data, const PipelineConfig& cfg,
                               const ExperimentSettings& settings, FeatureSet set, int jobs = 1);

struct ChannelScore {
    int channel = 0;
    double score = 0.0;
    int rank = 0; // dense, 1 = best
};

struct PairScore {
    int a = 0;
    int b = 0;
    double score = 0.0;
    int rank = 0;
};

struct ImportanceReport {
    std::vector<ChannelScore> channels; // sorted by rank then channel
    std::vector<PairScore> pairs;       // sorted by rank then (a, b)
    std::vector<std::string> warnings;
};

// Channel score = mean accuracy over subsets containing it; pair score over
// subsets containing both. `sizes` restricts to subsets of those sizes
// (empty = all).
ImportanceReport channel_importance(const SubsetReport& report, const std::vector<int>& sizes = {});

// Report writers (CSV body is byte-stable for fixed config + seed).
void write_report_csv(const Report& report, const std::string& path);
void write_report_json(const Report& report, const std::string& path);
void write_plot_data(const Report& report, const std::string& dir);
void write_subset_csv(const SubsetReport& report, const std::string& path);
void write_subset_json(const SubsetReport& report, const ImportanceReport& importance,
                       const std::string& path);
void write_subset_plot_data(const SubsetReport& report, const std::string& dir);

// Shortest round-trip decimal rendering used by every writer.
std::string format_double(double v);

} // namespace eegfeat

#endif

#ifndef EEGFEAT_TYPES_HPP
#define EEGFEAT_TYPES_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace eegfeat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct RecordingMeta {
    std::string subject;
    std::string session;
    std::optional<int> label; // binary class label once resolved
    std::string source_path;
};

// A multi-channel recording: one row per channel, one column per sample,
// values in physical units (microvolts for EEG sources).
struct Recording {
    Matrix samples; // n_c x T
    double sample_rate = 0.0;
    std::vector<std::string> channel_names;
    RecordingMeta meta;

    Eigen::Index channels() const { return samples.rows(); }
    Eigen::Index length() const { return samples.cols(); }

    // Enforces the type invariants; throws ParamError on violation.
    void validate() const;
};

// Ordered windowed segments of a recording (or of several pooled
// recordings). Window k of a single recording covers source samples
// [k*(w-h), k*(w-h)+w).
struct WindowSet {
    std::vector<Matrix> windows; // each n_c x window_len
    int window_len = 0;          // w, samples
    int overlap = 0;             // h, samples
    std::vector<int> labels;     // empty, or one label per window
    std::vector<RecordingMeta> provenance; // one entry per window

    std::size_t size() const { return windows.size(); }
};

} // namespace eegfeat

#endif

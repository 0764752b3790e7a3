#ifndef EEGFEAT_BANDPOWER_HPP
#define EEGFEAT_BANDPOWER_HPP

#include "eegfeat/types.hpp"
#include "eegfeat/welch.hpp"
#include "eegfeat/windowing.hpp"

#include <string>
#include <vector>

namespace eegfeat {

struct Band {
    std::string name;
    double low_hz = 0.0;
    double high_hz = 0.0;
};

struct BandSet {
    std::vector<Band> bands;

    // The eight theta/alpha/beta sub-bands used throughout: low/high theta,
    // low/middle/high alpha, low/medium/high beta.
    static BandSet default_eeg();

    int size() const { return static_cast<int>(bands.size()); }

    // Bands must be sorted, non-overlapping, and have low < high.
    void validate() const;
};

struct BandFeatureResult {
    Matrix features;             // n_w x (n_c * I), channel-major
    int zero_power_channels = 0; // window/channel pairs that fell back to uniform
};

// Per-channel band masses on the probability simplex, flattened channel-major
// (channel 0's I bands, then channel 1's, ...). A channel with zero in-band
// power contributes the uniform point 1/I and bumps the warning count.
BandFeatureResult band_features(const WindowSet& ws, double sample_rate, const BandSet& band_set,
                                const PsdParams& psd, int jobs = 1);

// PCA projection of the band features; the dimension sits at the second
// Zhu-Ghodsi elbow of the centered matrix's singular values.
struct BfModel {
    BandSet band_set;
    PsdParams psd_params;
    Vector pca_mean;     // length n_c * I
    Matrix pca_loadings; // (n_c * I) x d_bf, orthonormal columns
    int d_bf = 0;
};

// Fits the PCA part only; callers attach the band_set/psd_params they used
// to build `features` so the model can embed raw windows later.
BfModel fit_bf(const Matrix& features);

// (features - mean) * loadings.
Matrix apply_bf(const BfModel& model, const Matrix& features);

} // namespace eegfeat

#endif

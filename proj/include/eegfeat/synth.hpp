#ifndef EEGFEAT_SYNTH_HPP
#define EEGFEAT_SYNTH_HPP

#include "eegfeat/bandpower.hpp"
#include "eegfeat/types.hpp"

#include <cstdint>
#include <vector>

namespace eegfeat {

// Per-class generator recipe: a band-power profile (relative PSD amplitude
// per band of `bands`, on top of a small broadband floor) and a channel
// correlation matrix (symmetric, unit diagonal, positive semidefinite).
struct SynthClassSpec {
    std::vector<double> band_amplitudes;
    Matrix correlation;
};

struct SynthParams {
    int n_subjects = 8;
    int n_channels = 8;
    double sample_rate = 128.0;
    double seconds_per_class = 150.0; // per subject, session, class
    int n_sessions = 1;
    BandSet bands = BandSet::default_eeg();
    SynthClassSpec class0;
    SynthClassSpec class1;
    double noise_floor = 0.05; // broadband amplitude under every profile
    std::uint64_t seed = 7;
};

// Gaussian noise shaped to the class spectrum (piecewise-constant amplitude
// over the band grid, silent below 0.5 Hz) and mixed to the class
// correlation structure. One Recording per (subject, session, class), label
// in the metadata. Identical class specs produce chance-level data by
// construction.
std::vector<Recording> synth_dataset(const SynthParams& params);

// Convenience specs used by tests and the synth CLI defaults.
SynthClassSpec uniform_spec(int n_channels, int n_bands);

// Correlation matrix with `rho` between all channel pairs in `members` and 0
// elsewhere (unit diagonal).
Matrix planted_correlation(int n_channels, const std::vector<int>& members, double rho);

} // namespace eegfeat

#endif

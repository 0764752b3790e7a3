#ifndef EEGFEAT_WELCH_HPP
#define EEGFEAT_WELCH_HPP

#include "eegfeat/types.hpp"

#include <complex>
#include <span>
#include <string>

namespace eegfeat {

struct PsdParams {
    int segment_samples = 0;    // 0 selects min(w, 256)
    double overlap = 0.5;       // fraction of a segment
    std::string taper = "hann"; // "hann" or "boxcar"

    int resolve_segment(int window_len) const;
};

struct Psd {
    Vector frequency; // Hz, one-sided grid
    Vector power;     // density units (x^2 per Hz)
};

// Welch's method: split x into overlapping segments, taper, average the
// one-sided scaled periodograms. Density scaling, no detrending, so the
// rectangle-rule integral of the PSD approximates the signal's mean square.
Psd welch_psd(const Eigen::Ref<const Vector>& x, double sample_rate, const PsdParams& params);

// Real-to-complex FFT (length n in, n/2+1 out). Thread-safe; plans are
// cached per length.
void rfft(std::span<const double> in, std::span<std::complex<double>> out);

// Complex-to-real inverse of rfft, normalized by 1/n.
void irfft(std::span<const std::complex<double>> in, std::span<double> out);

} // namespace eegfeat

#endif

#ifndef EEGFEAT_FILTER_HPP
#define EEGFEAT_FILTER_HPP

#include "eegfeat/types.hpp"

#include <span>
#include <vector>

namespace eegfeat {

// Digital IIR transfer function b(z)/a(z), a[0] == 1.
struct TransferFn {
    std::vector<double> b;
    std::vector<double> a;
    int order() const { return static_cast<int>(a.size()) - 1; }
};

// Butterworth designs via the bilinear transform with cutoff prewarping.
TransferFn butter_lowpass(int order, double cutoff_hz, double sample_rate);
TransferFn butter_highpass(int order, double cutoff_hz, double sample_rate);

// Single-pass IIR filter (direct form II transposed). `state` holds the
// order-length delay line and is updated in place.
void lfilter(const TransferFn& tf, std::span<const double> x, std::span<double> y,
             std::span<double> state);

// Steady-state step-response initial conditions, scaled by the first input
// sample inside filtfilt to suppress startup transients.
std::vector<double> lfilter_zi(const TransferFn& tf);

// Forward-backward (zero phase) filtering with odd-reflection edge padding
// of length 3*(order+1). Requires x longer than the padding.
Vector filtfilt(const TransferFn& tf, const Eigen::Ref<const Vector>& x);

// Apply a 4th-order Butterworth high-pass at `high_pass_hz` followed by a
// 4th-order Butterworth low-pass at `low_pass_hz`, each forward-backward,
// independently per channel. high_pass_hz == 0 skips the high-pass stage.
Recording bandpass_filter(const Recording& rec, double high_pass_hz, double low_pass_hz);

} // namespace eegfeat

#endif

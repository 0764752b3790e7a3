#include "eegfeat/filter.hpp"

#include "eegfeat/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace eegfeat {

namespace {

using cd = std::complex<double>;

// Expand a polynomial with the given roots; returns real coefficients,
// highest degree first. Roots must come in conjugate pairs.
std::vector<double> poly_from_roots(const std::vector<cd>& roots) {
    std::vector<cd> coeff{1.0};
    for (const cd& r : roots) {
        std::vector<cd> next(coeff.size() + 1, 0.0);
        for (std::size_t i = 0; i < coeff.size(); ++i) {
            next[i] += coeff[i];
            next[i + 1] -= coeff[i] * r;
        }
        coeff = std::move(next);
    }
    std::vector<double> out(coeff.size());
    for (std::size_t i = 0; i < coeff.size(); ++i) out[i] = coeff[i].real();
    return out;
}

TransferFn butter_design(int order, double cutoff_hz, double sample_rate, bool highpass) {
    if (order < 1) throw ParamError("filter order must be >= 1");
    if (!(cutoff_hz > 0.0) || cutoff_hz >= sample_rate / 2.0)
        throw ParamError("filter cutoff must lie strictly between 0 and the Nyquist frequency");

    const double pi = std::numbers::pi;
    const double warped = 2.0 * sample_rate * std::tan(pi * cutoff_hz / sample_rate);

    // Analog Butterworth prototype poles on the unit circle, left half plane.
    std::vector<cd> poles;
    poles.reserve(static_cast<std::size_t>(order));
    for (int k = 1; k <= order; ++k) {
        double theta = pi * (2.0 * k + order - 1.0) / (2.0 * order);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }

    std::vector<cd> zeros;
    cd gain;
    if (highpass) {
        // LP -> HP: s -> warped / s. Zeros move to the origin, gain -> 1.
        for (auto& p : poles) p = warped / p;
        zeros.assign(static_cast<std::size_t>(order), cd(0.0, 0.0));
        gain = 1.0;
    } else {
        for (auto& p : poles) p *= warped;
        gain = std::pow(warped, order);
    }

    // Bilinear transform s = 2*fs*(z-1)/(z+1).
    const double fs2 = 2.0 * sample_rate;
    cd num_scale = 1.0, den_scale = 1.0;
    for (const auto& z : zeros) num_scale *= (fs2 - z);
    for (const auto& p : poles) den_scale *= (fs2 - p);
    std::vector<cd> zd, pd;
    for (const auto& z : zeros) zd.push_back((fs2 + z) / (fs2 - z));
    for (const auto& p : poles) pd.push_back((fs2 + p) / (fs2 - p));
    // Zeros mapped from s = infinity land at z = -1.
    while (zd.size() < pd.size()) zd.emplace_back(-1.0, 0.0);
    double k_digital = (gain * num_scale / den_scale).real();

    TransferFn tf;
    tf.b = poly_from_roots(zd);
    for (auto& c : tf.b) c *= k_digital;
    tf.a = poly_from_roots(pd);
    return tf;
}

} // namespace

TransferFn butter_lowpass(int order, double cutoff_hz, double sample_rate) {
    return butter_design(order, cutoff_hz, sample_rate, false);
}

TransferFn butter_highpass(int order, double cutoff_hz, double sample_rate) {
    return butter_design(order, cutoff_hz, sample_rate, true);
}

void lfilter(const TransferFn& tf, std::span<const double> x, std::span<double> y,
             std::span<double> state) {
    const auto n = tf.a.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        double xi = x[i];
        double yi = tf.b[0] * xi + state[0];
        for (std::size_t j = 1; j < n - 1; ++j)
            state[j - 1] = tf.b[j] * xi + state[j] - tf.a[j] * yi;
        state[n - 2] = tf.b[n - 1] * xi - tf.a[n - 1] * yi;
        y[i] = yi;
    }
}

std::vector<double> lfilter_zi(const TransferFn& tf) {
    const int n = tf.order();
    // Solve (I - A^T) zi = b[1:] - a[1:]*b[0] where A is the companion
    // matrix of a; the solution is the filter state after an infinitely
    // long unit step.
    Matrix m = Matrix::Identity(n, n);
    for (int j = 0; j < n; ++j) m(j, 0) += tf.a[static_cast<std::size_t>(j) + 1];
    for (int i = 1; i < n; ++i) m(i - 1, i) -= 1.0;
    Vector rhs(n);
    for (int j = 0; j < n; ++j)
        rhs(j) = tf.b[static_cast<std::size_t>(j) + 1] - tf.a[static_cast<std::size_t>(j) + 1] * tf.b[0];
    Vector zi = m.partialPivLu().solve(rhs);
    return {zi.data(), zi.data() + n};
}

Vector filtfilt(const TransferFn& tf, const Eigen::Ref<const Vector>& x) {
    const auto t = x.size();
    const int padlen = 3 * (tf.order() + 1);
    if (t <= padlen)
        throw ParamError("signal too short for zero-phase filtering: need more than " +
                         std::to_string(padlen) + " samples, got " + std::to_string(t));

    // Odd (point-symmetric) reflection about both end samples.
    const auto ext_len = t + 2 * padlen;
    Vector ext(ext_len);
    for (int i = 0; i < padlen; ++i) ext(i) = 2.0 * x(0) - x(padlen - i);
    ext.segment(padlen, t) = x;
    for (int i = 0; i < padlen; ++i) ext(padlen + t + i) = 2.0 * x(t - 1) - x(t - 2 - i);

    const auto zi = lfilter_zi(tf);
    std::vector<double> state(zi.size());

    Vector fwd(ext_len);
    for (std::size_t j = 0; j < zi.size(); ++j) state[j] = zi[j] * ext(0);
    lfilter(tf, {ext.data(), static_cast<std::size_t>(ext_len)},
            {fwd.data(), static_cast<std::size_t>(ext_len)}, state);

    fwd.reverseInPlace();
    Vector bwd(ext_len);
    for (std::size_t j = 0; j < zi.size(); ++j) state[j] = zi[j] * fwd(0);
    lfilter(tf, {fwd.data(), static_cast<std::size_t>(ext_len)},
            {bwd.data(), static_cast<std::size_t>(ext_len)}, state);
    bwd.reverseInPlace();

    return bwd.segment(padlen, t);
}

Recording bandpass_filter(const Recording& rec, double high_pass_hz, double low_pass_hz) {
    rec.validate();
    const double nyquist = rec.sample_rate / 2.0;
    if (high_pass_hz < 0.0 || high_pass_hz >= low_pass_hz)
        throw ParamError("require 0 <= high_pass < low_pass");
    if (low_pass_hz >= nyquist)
        throw ParamError("low-pass cutoff " + std::to_string(low_pass_hz) +
                         " Hz is at or above the Nyquist frequency " + std::to_string(nyquist) + " Hz");

    constexpr int kOrder = 4;
    Recording out = rec;
    if (high_pass_hz > 0.0) {
        const auto hp = butter_highpass(kOrder, high_pass_hz, rec.sample_rate);
        for (Eigen::Index c = 0; c < out.channels(); ++c)
            out.samples.row(c) = filtfilt(hp, out.samples.row(c).transpose()).transpose();
    }
    const auto lp = butter_lowpass(kOrder, low_pass_hz, rec.sample_rate);
    for (Eigen::Index c = 0; c < out.channels(); ++c)
        out.samples.row(c) = filtfilt(lp, out.samples.row(c).transpose()).transpose();
    return out;
}

} // namespace eegfeat

#include "eegfeat/welch.hpp"

#include "eegfeat/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace eegfeat {

namespace {

// FFTW's planner is not thread-safe, and plans are expensive enough to be
// worth reusing across the many same-length transforms in a run. Plans are
// created with FFTW_UNALIGNED so the new-array execute functions accept
// caller-owned buffers.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan forward(int n) {
        std::lock_guard lock(mutex_);
        auto it = forward_.find(n);
        if (it != forward_.end()) return it->second;
        std::vector<double> in(static_cast<size_t>(n));
        std::vector<std::complex<double>> out(static_cast<size_t>(n) / 2 + 1);
        fftw_plan plan = fftw_plan_dft_r2c_1d(
            n, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        forward_.emplace(n, plan);
        return plan;
    }

    fftw_plan inverse(int n) {
        std::lock_guard lock(mutex_);
        auto it = inverse_.find(n);
        if (it != inverse_.end()) return it->second;
        std::vector<std::complex<double>> in(static_cast<size_t>(n) / 2 + 1);
        std::vector<double> out(static_cast<size_t>(n));
        fftw_plan plan = fftw_plan_dft_c2r_1d(
            n, reinterpret_cast<fftw_complex*>(in.data()), out.data(),
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        inverse_.emplace(n, plan);
        return plan;
    }

private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<int, fftw_plan> forward_;
    std::map<int, fftw_plan> inverse_;
};

Vector make_taper(const std::string& name, int n) {
    Vector w(n);
    if (name == "hann") {
        for (int i = 0; i < n; ++i)
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
    } else if (name == "boxcar") {
        w.setOnes();
    } else {
        throw ParamError("unknown PSD taper: " + name);
    }
    return w;
}

} // namespace

int PsdParams::resolve_segment(int window_len) const {
    int seg = segment_samples > 0 ? segment_samples : std::min(window_len, 256);
    if (seg > window_len)
        throw ParamError("PSD segment length " + std::to_string(seg) +
                         " exceeds window length " + std::to_string(window_len));
    if (seg < 8)
        throw ParamError("PSD segment length " + std::to_string(seg) + " is too short (minimum 8)");
    return seg;
}

void rfft(std::span<const double> in, std::span<std::complex<double>> out) {
    const int n = static_cast<int>(in.size());
    if (out.size() != in.size() / 2 + 1)
        throw ShapeError("rfft output span has wrong length");
    fftw_plan plan = PlanCache::instance().forward(n);
    // new-array execution; the input is not modified by r2c transforms
    fftw_execute_dft_r2c(plan, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void irfft(std::span<const std::complex<double>> in, std::span<double> out) {
    const int n = static_cast<int>(out.size());
    if (in.size() != out.size() / 2 + 1)
        throw ShapeError("irfft input span has wrong length");
    // c2r destroys its input, so work on a copy
    std::vector<std::complex<double>> tmp(in.begin(), in.end());
    fftw_plan plan = PlanCache::instance().inverse(n);
    fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(tmp.data()), out.data());
    const double scale = 1.0 / n;
    for (double& v : out) v *= scale;
}

Psd welch_psd(const Eigen::Ref<const Vector>& x, double sample_rate, const PsdParams& params) {
    if (sample_rate <= 0.0) throw ParamError("sample rate must be positive");
    if (params.overlap < 0.0 || params.overlap >= 1.0)
        throw ParamError("PSD overlap fraction must lie in [0, 1)");
    const int n = static_cast<int>(x.size());
    const int seg = params.resolve_segment(n);
    const int noverlap = static_cast<int>(seg * params.overlap);
    const int step = seg - noverlap;
    const int n_segments = (n - noverlap) / step;

    const Vector taper = make_taper(params.taper, seg);
    const double win_ss = taper.squaredNorm();
    const double scale = 1.0 / (sample_rate * win_ss);
    const int n_bins = seg / 2 + 1;

    Vector power = Vector::Zero(n_bins);
    std::vector<double> buf(static_cast<size_t>(seg));
    std::vector<std::complex<double>> spec(static_cast<size_t>(n_bins));
    for (int s = 0; s < n_segments; ++s) {
        const int start = s * step;
        for (int i = 0; i < seg; ++i) buf[static_cast<size_t>(i)] = x[start + i] * taper[i];
        rfft(buf, spec);
        for (int k = 0; k < n_bins; ++k) power[k] += std::norm(spec[static_cast<size_t>(k)]);
    }
    power *= scale / n_segments;
    // one-sided: double everything except DC and (for even lengths) Nyquist
    const int last_doubled = (seg % 2 == 0) ? n_bins - 2 : n_bins - 1;
    for (int k = 1; k <= last_doubled; ++k) power[k] *= 2.0;

    Psd psd;
    psd.power = std::move(power);
    psd.frequency = Vector(n_bins);
    for (int k = 0; k < n_bins; ++k) psd.frequency[k] = k * sample_rate / seg;
    return psd;
}

} // namespace eegfeat

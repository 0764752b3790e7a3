#include "eegfeat/synth.hpp"

#include "eegfeat/error.hpp"
#include "eegfeat/rng.hpp"
#include "eegfeat/welch.hpp"

#include <Eigen/Cholesky>

#include <complex>
#include <string>

namespace eegfeat {

namespace {

Matrix correlation_cholesky(const Matrix& corr, int n_channels) {
    if (corr.rows() != n_channels || corr.cols() != n_channels)
        throw ShapeError("class correlation matrix does not match the channel count");
    if (!corr.isApprox(corr.transpose(), 1e-10))
        throw ParamError("class correlation matrix is not symmetric");
    for (int i = 0; i < n_channels; ++i)
        if (std::abs(corr(i, i) - 1.0) > 1e-10)
            throw ParamError("class correlation matrix must have a unit diagonal");
    Eigen::LLT<Matrix> llt(corr);
    if (llt.info() != Eigen::Success)
        throw ParamError("class correlation matrix is not positive definite");
    return llt.matrixL();
}

// Amplitude of the shaping filter on the rfft grid: noise floor everywhere
// above 0.5 Hz, plus the band profile on its band. Frequencies below 0.5 Hz
// are silenced so the high-pass stage has nothing to ring on.
Vector shaping_curve(const SynthParams& params, const SynthClassSpec& spec, int n_bins, int length) {
    if (static_cast<int>(spec.band_amplitudes.size()) != params.bands.size())
        throw ParamError("class spec has " + std::to_string(spec.band_amplitudes.size()) +
                         " band amplitudes, band set has " + std::to_string(params.bands.size()));
    Vector amp(n_bins);
    for (int k = 0; k < n_bins; ++k) {
        const double f = k * params.sample_rate / length;
        if (f < 0.5) {
            amp[k] = 0.0;
            continue;
        }
        double a = params.noise_floor;
        for (int b = 0; b < params.bands.size(); ++b) {
            const Band& band = params.bands.bands[static_cast<size_t>(b)];
            if (f >= band.low_hz && f < band.high_hz) {
                a += spec.band_amplitudes[static_cast<size_t>(b)];
                break;
            }
        }
        amp[k] = a;
    }
    return amp;
}

Matrix shaped_noise(const SynthParams& params, const Vector& amp, int length, Rng& rng) {
    const int n_c = params.n_channels;
    const int n_bins = length / 2 + 1;
    Matrix out(n_c, length);
    std::vector<double> white(static_cast<size_t>(length));
    std::vector<std::complex<double>> spec(static_cast<size_t>(n_bins));
    std::vector<double> shaped(static_cast<size_t>(length));
    for (int c = 0; c < n_c; ++c) {
        for (double& v : white) v = rng.next_normal();
        rfft(white, spec);
        for (int k = 0; k < n_bins; ++k) spec[static_cast<size_t>(k)] *= amp[k];
        irfft(spec, shaped);
        for (int t = 0; t < length; ++t) out(c, t) = shaped[static_cast<size_t>(t)];
    }
    return out;
}

} // namespace

SynthClassSpec uniform_spec(int n_channels, int n_bands) {
    SynthClassSpec spec;
    spec.band_amplitudes.assign(static_cast<size_t>(n_bands), 1.0);
    spec.correlation = Matrix::Identity(n_channels, n_channels);
    return spec;
}

Matrix planted_correlation(int n_channels, const std::vector<int>& members, double rho) {
    Matrix corr = Matrix::Identity(n_channels, n_channels);
    for (size_t a = 0; a < members.size(); ++a)
        for (size_t b = a + 1; b < members.size(); ++b) {
            const int i = members[a];
            const int j = members[b];
            if (i < 0 || i >= n_channels || j < 0 || j >= n_channels)
                throw ParamError("planted channel index out of range");
            corr(i, j) = rho;
            corr(j, i) = rho;
        }
    return corr;
}

std::vector<Recording> synth_dataset(const SynthParams& params) {
    if (params.n_subjects < 1) throw ParamError("synth needs at least 1 subject");
    if (params.n_channels < 2) throw ParamError("synth needs at least 2 channels");
    if (params.n_sessions < 1) throw ParamError("synth needs at least 1 session");
    if (params.sample_rate <= 0.0) throw ParamError("sample rate must be positive");
    const int length = static_cast<int>(params.seconds_per_class * params.sample_rate);
    if (length < 16) throw ParamError("seconds_per_class too short");
    params.bands.validate();

    const Matrix chol0 = correlation_cholesky(params.class0.correlation, params.n_channels);
    const Matrix chol1 = correlation_cholesky(params.class1.correlation, params.n_channels);
    const int n_bins = length / 2 + 1;
    const Vector amp0 = shaping_curve(params, params.class0, n_bins, length);
    const Vector amp1 = shaping_curve(params, params.class1, n_bins, length);

    std::vector<std::string> channel_names;
    channel_names.reserve(static_cast<size_t>(params.n_channels));
    for (int c = 0; c < params.n_channels; ++c) channel_names.push_back("ch" + std::to_string(c));

    std::vector<Recording> dataset;
    dataset.reserve(static_cast<size_t>(params.n_subjects * params.n_sessions * 2));
    for (int subject = 0; subject < params.n_subjects; ++subject)
        for (int session = 0; session < params.n_sessions; ++session)
            for (int label = 0; label < 2; ++label) {
                Rng rng(derive_seed(params.seed, "synth-rec", static_cast<std::uint64_t>(subject),
                                    static_cast<std::uint64_t>(session * 2 + label)));
                const Vector& amp = label == 0 ? amp0 : amp1;
                const Matrix& chol = label == 0 ? chol0 : chol1;
                Recording rec;
                rec.samples = chol * shaped_noise(params, amp, length, rng);
                rec.sample_rate = params.sample_rate;
                rec.channel_names = channel_names;
                rec.meta.subject = "s" + std::to_string(subject);
                rec.meta.session = "session" + std::to_string(session);
                rec.meta.label = label;
                rec.meta.source_path = "synthetic";
                dataset.push_back(std::move(rec));
            }
    return dataset;
}

} // namespace eegfeat

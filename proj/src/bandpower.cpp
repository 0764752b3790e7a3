#include "eegfeat/bandpower.hpp"

#include "eegfeat/error.hpp"
#include "eegfeat/graphcore.hpp"
#include "eegfeat/parallel.hpp"

#include <Eigen/SVD>

#include <atomic>
#include <string>
#include <vector>

namespace eegfeat {

BandSet BandSet::default_eeg() {
    return BandSet{{
        {"theta_low", 4.1, 5.8},
        {"theta_high", 5.9, 7.4},
        {"alpha_low", 7.4, 8.9},
        {"alpha_middle", 9.0, 11.0},
        {"alpha_high", 11.1, 12.9},
        {"beta_low", 13.0, 19.9},
        {"beta_medium", 20.0, 25.0},
        {"beta_high", 25.0, 30.0},
    }};
}

void BandSet::validate() const {
    if (bands.empty()) throw ParamError("band set is empty");
    for (size_t i = 0; i < bands.size(); ++i) {
        const Band& b = bands[i];
        if (!(b.low_hz < b.high_hz))
            throw ParamError("band " + b.name + " has low edge >= high edge");
        if (i > 0 && b.low_hz < bands[i - 1].high_hz)
            throw ParamError("band " + b.name + " overlaps " + bands[i - 1].name);
    }
}

BandFeatureResult band_features(const WindowSet& ws, double sample_rate, const BandSet& band_set,
                                const PsdParams& psd, int jobs) {
    band_set.validate();
    if (ws.size() == 0) throw ParamError("no windows to featurize");
    const double nyquist = sample_rate / 2.0;
    for (const Band& b : band_set.bands)
        if (b.high_hz >= nyquist)
            throw ParamError("band " + b.name + " extends past the Nyquist frequency");

    const int n_c = static_cast<int>(ws.windows.front().rows());
    const int n_bands = band_set.size();

    // Map PSD bins to bands once; the grid is the same for every window.
    const int seg = psd.resolve_segment(ws.window_len);
    const int n_bins = seg / 2 + 1;
    std::vector<int> bin_band(static_cast<size_t>(n_bins), -1);
    for (int k = 0; k < n_bins; ++k) {
        const double f = k * sample_rate / seg;
        for (int b = 0; b < n_bands; ++b)
            if (f >= band_set.bands[static_cast<size_t>(b)].low_hz &&
                f < band_set.bands[static_cast<size_t>(b)].high_hz) {
                bin_band[static_cast<size_t>(k)] = b;
                break;
            }
    }

    BandFeatureResult result;
    result.features.resize(ws.size(), n_c * n_bands);
    std::atomic<int> zero_power{0};
    parallel_for(ws.size(), jobs, [&](size_t k) {
        const Matrix& win = ws.windows[k];
        for (int c = 0; c < n_c; ++c) {
            Psd spectrum = welch_psd(win.row(c).transpose(), sample_rate, psd);
            Vector mass = Vector::Zero(n_bands);
            for (int bin = 0; bin < n_bins; ++bin)
                if (int b = bin_band[static_cast<size_t>(bin)]; b >= 0) mass[b] += spectrum.power[bin];
            const double total = mass.sum();
            if (total > 0.0) {
                mass /= total;
            } else {
                mass.setConstant(1.0 / n_bands);
                zero_power.fetch_add(1, std::memory_order_relaxed);
            }
            result.features.row(static_cast<Eigen::Index>(k)).segment(c * n_bands, n_bands) = mass.transpose();
        }
    });
    result.zero_power_channels = zero_power.load();
    return result;
}

BfModel fit_bf(const Matrix& features) {
    const int n = static_cast<int>(features.rows());
    const int p = static_cast<int>(features.cols());
    if (n < 2) throw ParamError("PCA fit needs at least 2 rows");

    BfModel model;
    model.pca_mean = features.colwise().mean().transpose();
    Matrix centered = features.rowwise() - model.pca_mean.transpose();

    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    const double floor = sigma.size() > 0 ? sigma[0] * 1e-12 : 0.0;
    std::vector<double> positive;
    for (int i = 0; i < sigma.size(); ++i)
        if (sigma[i] > floor) positive.push_back(sigma[i]);
    if (positive.empty()) throw ParamError("PCA fit on identical rows: centered matrix has rank 0");

    int d = positive.size() >= 3 ? zhu_ghodsi(positive, 2) : static_cast<int>(positive.size());
    d = std::clamp(d, 1, std::min(n - 1, p));
    model.d_bf = d;
    model.pca_loadings = svd.matrixV().leftCols(d);
    // sign convention as in the spectral embedding: reproducible loadings
    for (int j = 0; j < d; ++j) {
        int at = 0;
        model.pca_loadings.col(j).cwiseAbs().maxCoeff(&at);
        if (model.pca_loadings(at, j) < 0.0) model.pca_loadings.col(j) = -model.pca_loadings.col(j);
    }
    return model;
}

Matrix apply_bf(const BfModel& model, const Matrix& features) {
    if (features.cols() != model.pca_mean.size())
        throw ShapeError("feature matrix has " + std::to_string(features.cols()) +
                         " columns, model expects " + std::to_string(model.pca_mean.size()));
    return (features.rowwise() - model.pca_mean.transpose()) * model.pca_loadings;
}

} // namespace eegfeat

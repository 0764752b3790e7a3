#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "eegfeat/bandpower.hpp"
#include "eegfeat/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace eegfeat;

namespace {

WindowSet tone_windows(int n_w, int n_c, int w, double fs, double hz) {
    WindowSet ws;
    ws.window_len = w;
    for (int k = 0; k < n_w; ++k) {
        Matrix m(n_c, w);
        for (int c = 0; c < n_c; ++c)
            for (int t = 0; t < w; ++t)
                m(c, t) = std::sin(2.0 * std::numbers::pi * hz * (t + k * w) / fs + 0.3 * c);
        ws.windows.push_back(m);
    }
    return ws;
}

} // namespace

TEST_CASE("default band set shape and edges") {
    BandSet bands = BandSet::default_eeg();
    REQUIRE(bands.size() == 8);
    CHECK(bands.bands.front().name == "theta_low");
    CHECK(bands.bands.front().low_hz == 4.1);
    CHECK(bands.bands.back().name == "beta_high");
    CHECK(bands.bands.back().high_hz == 30.0);
    CHECK_NOTHROW(bands.validate());

    BandSet reversed{{{"bad", 5.0, 4.0}}};
    CHECK_THROWS_AS(reversed.validate(), ParamError);
    BandSet overlapping{{{"a", 1.0, 3.0}, {"b", 2.0, 4.0}}};
    CHECK_THROWS_AS(overlapping.validate(), ParamError);
    CHECK_THROWS_AS(BandSet{}.validate(), ParamError);
}

TEST_CASE("nineteen channels and eight bands give 152 features") {
    WindowSet ws = tone_windows(2, 19, 320, 128.0, 10.0);
    BandFeatureResult result = band_features(ws, 128.0, BandSet::default_eeg(), {});
    CHECK(result.features.rows() == 2);
    CHECK(result.features.cols() == 152);
}

TEST_CASE("a 10 Hz tone lands in the middle alpha band") {
    const BandSet bands = BandSet::default_eeg();
    WindowSet ws = tone_windows(3, 2, 512, 128.0, 10.0);
    BandFeatureResult result = band_features(ws, 128.0, bands, {});
    const int alpha_middle = 3;
    for (int k = 0; k < 3; ++k)
        for (int c = 0; c < 2; ++c)
            CHECK(result.features(k, c * 8 + alpha_middle) > 0.9);
}

TEST_CASE("band rows live on the probability simplex") {
    std::mt19937 gen(31);
    std::normal_distribution<double> normal;
    WindowSet ws;
    ws.window_len = 256;
    for (int k = 0; k < 4; ++k) {
        Matrix m(3, 256);
        for (int c = 0; c < 3; ++c)
            for (int t = 0; t < 256; ++t) m(c, t) = normal(gen);
        ws.windows.push_back(m);
    }
    BandFeatureResult result = band_features(ws, 128.0, BandSet::default_eeg(), {});
    for (int k = 0; k < 4; ++k)
        for (int c = 0; c < 3; ++c) {
            double sum = result.features.row(k).segment(c * 8, 8).sum();
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(result.features.row(k).segment(c * 8, 8).minCoeff() >= 0.0);
        }
}

TEST_CASE("band edges are half-open") {
    // df = 1 Hz; the 1 Hz bin belongs to [1, 2), not [0, 1)
    BandSet bands{{{"lo", 0.0, 1.0}, {"hi", 1.0, 2.0}}};
    WindowSet ws = tone_windows(1, 2, 8, 8.0, 1.0);
    BandFeatureResult result = band_features(ws, 8.0, bands, {});
    CHECK(result.features(0, 1) > 0.95);
    CHECK(result.features(0, 0) < 0.05);
}

TEST_CASE("zero-power channels fall back to the uniform point") {
    BandSet bands{{{"lo", 0.5, 1.5}, {"hi", 1.5, 2.5}}};
    WindowSet ws = tone_windows(3, 2, 16, 8.0, 1.0);
    for (auto& w : ws.windows) w.row(1).setZero();
    BandFeatureResult result = band_features(ws, 8.0, bands, {});
    CHECK(result.zero_power_channels == 3);
    for (int k = 0; k < 3; ++k) {
        CHECK(result.features(k, 2) == 0.5);
        CHECK(result.features(k, 3) == 0.5);
    }
}

TEST_CASE("band features reject bands past nyquist and empty input") {
    BandSet bad{{{"edge", 1.0, 4.0}}};
    WindowSet ws = tone_windows(1, 2, 8, 8.0, 1.0);
    CHECK_THROWS_AS(band_features(ws, 8.0, bad, {}), ParamError);
    CHECK_THROWS_AS(band_features(WindowSet{}, 8.0, BandSet::default_eeg(), {}), ParamError);
}

TEST_CASE("parallel band features match serial") {
    WindowSet ws = tone_windows(6, 3, 256, 128.0, 10.0);
    BandFeatureResult serial = band_features(ws, 128.0, BandSet::default_eeg(), {}, 1);
    BandFeatureResult parallel = band_features(ws, 128.0, BandSet::default_eeg(), {}, 4);
    CHECK((serial.features - parallel.features).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pca on exactly low-rank data recovers the rank") {
    std::mt19937 gen(32);
    std::normal_distribution<double> normal;
    Vector base = Vector::Random(6);
    Vector dir = Vector::Random(6).normalized();

    Matrix rank1(8, 6);
    for (int i = 0; i < 8; ++i) rank1.row(i) = (base + normal(gen) * dir).transpose();
    BfModel m1 = fit_bf(rank1);
    CHECK(m1.d_bf == 1);

    Vector dir2 = Vector::Random(6).normalized();
    Matrix rank2(8, 6);
    for (int i = 0; i < 8; ++i)
        rank2.row(i) = (base + normal(gen) * dir + normal(gen) * dir2).transpose();
    BfModel m2 = fit_bf(rank2);
    CHECK(m2.d_bf == 2);
}

TEST_CASE("pca loadings are orthonormal and sign-fixed") {
    std::mt19937 gen(33);
    std::normal_distribution<double> normal;
    Matrix x(20, 5);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 5; ++j) x(i, j) = normal(gen);
    BfModel model = fit_bf(x);
    Matrix gram = model.pca_loadings.transpose() * model.pca_loadings;
    for (int i = 0; i < model.d_bf; ++i)
        for (int j = 0; j < model.d_bf; ++j)
            CHECK(gram(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
    for (int j = 0; j < model.d_bf; ++j) {
        int at = 0;
        model.pca_loadings.col(j).cwiseAbs().maxCoeff(&at);
        CHECK(model.pca_loadings(at, j) >= 0.0);
    }
}

TEST_CASE("pca embedding is invariant to a constant shift") {
    std::mt19937 gen(34);
    std::normal_distribution<double> normal;
    Matrix x(15, 4);
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 4; ++j) x(i, j) = normal(gen);
    Matrix shifted = x.rowwise() + Eigen::RowVector4d(5.0, -2.0, 0.25, 100.0);

    BfModel a = fit_bf(x);
    BfModel b = fit_bf(shifted);
    REQUIRE(a.d_bf == b.d_bf);
    Matrix ya = apply_bf(a, x);
    Matrix yb = apply_bf(b, shifted);
    CHECK((ya - yb).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pca separates two clusters along their displacement") {
    std::mt19937 gen(35);
    std::normal_distribution<double> normal(0.0, 0.05);
    Vector dir = Vector::Random(6).normalized();
    Matrix x(30, 6);
    for (int i = 0; i < 30; ++i) {
        Vector noise(6);
        for (int j = 0; j < 6; ++j) noise[j] = normal(gen);
        x.row(i) = ((i < 15 ? 1.0 : -1.0) * dir + noise).transpose();
    }
    BfModel model = fit_bf(x);
    double cosine = std::abs(model.pca_loadings.col(0).dot(dir));
    CHECK(cosine > 0.99);
}

TEST_CASE("apply_bf projects against the stored mean") {
    Matrix x(3, 2);
    x << 0, 0, 2, 0, 4, 0;
    BfModel model = fit_bf(x);
    REQUIRE(model.d_bf == 1);
    CHECK(model.pca_mean[0] == doctest::Approx(2.0).epsilon(1e-15));
    Matrix y = apply_bf(model, x);
    CHECK(y(0, 0) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(y(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(y(2, 0) == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(apply_bf(model, Matrix::Zero(2, 5)), ShapeError);
}

TEST_CASE("pca fit rejects degenerate input") {
    CHECK_THROWS_AS(fit_bf(Matrix::Zero(1, 4)), ParamError);
    Matrix same = Matrix::Ones(5, 4);
    CHECK_THROWS_AS(fit_bf(same), ParamError);
}

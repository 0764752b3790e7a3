#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "eegfeat/error.hpp"
#include "eegfeat/graphcore.hpp"

#include "support/oracles.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace eegfeat;

namespace {

Matrix random_window(std::mt19937& gen, int n_c, int w) {
    std::normal_distribution<double> normal;
    Matrix m(n_c, w);
    for (int i = 0; i < n_c; ++i)
        for (int t = 0; t < w; ++t) m(i, t) = normal(gen);
    return m;
}

WindowSet make_windows(std::mt19937& gen, int n_w, int n_c, int w) {
    WindowSet ws;
    ws.window_len = w;
    for (int k = 0; k < n_w; ++k) ws.windows.push_back(random_window(gen, n_c, w));
    return ws;
}

GraphSeries series_of(std::vector<Matrix> graphs) {
    GraphSeries gs;
    gs.graphs = std::move(graphs);
    return gs;
}

} // namespace

TEST_CASE("pearson correlation of a known pair") {
    Matrix w(2, 3);
    w << 1, 2, 4, 1, 3, 5;
    Matrix g = correlation_graph(w);
    CHECK(g(0, 0) == 1.0);
    CHECK(g(1, 1) == 1.0);
    CHECK(g(0, 1) == doctest::Approx(0.9819805060619656).epsilon(1e-12));
    CHECK(g(0, 1) == g(1, 0));
}

TEST_CASE("correlation graph properties on random windows") {
    std::mt19937 gen(11);
    for (int rep = 0; rep < 5; ++rep) {
        Matrix w = random_window(gen, 5, 40);
        Matrix g = correlation_graph(w);
        Matrix ref = testsupport::oracle_correlation(w);
        for (int i = 0; i < 5; ++i) {
            CHECK(g(i, i) == 1.0);
            for (int j = 0; j < 5; ++j) {
                CHECK(g(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-12));
                CHECK(g(i, j) == g(j, i));
                CHECK(std::abs(g(i, j)) <= 1.0);
            }
        }
    }
}

TEST_CASE("correlation graph extremes and degenerate channels") {
    Matrix w(3, 4);
    w << 1, 2, 3, 4, // x
        -2, -4, -6, -8, // -2x
        5, 5, 5, 5; // constant
    Matrix g = correlation_graph(w);
    CHECK(g(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(g(0, 2) == 0.0);
    CHECK(g(1, 2) == 0.0);
    CHECK(g(2, 2) == 1.0);

    CHECK_THROWS_AS(correlation_graph(Matrix::Zero(3, 1)), ParamError);
}

TEST_CASE("channel permutation conjugates the correlation graph") {
    std::mt19937 gen(12);
    Matrix w = random_window(gen, 4, 30);
    std::vector<int> perm = {2, 0, 3, 1};
    Matrix wp(4, 30);
    for (int i = 0; i < 4; ++i) wp.row(i) = w.row(perm[static_cast<std::size_t>(i)]);
    Matrix g = correlation_graph(w);
    Matrix gp = correlation_graph(wp);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(gp(i, j) == doctest::Approx(g(perm[static_cast<std::size_t>(i)],
                                                perm[static_cast<std::size_t>(j)]))
                                  .epsilon(1e-13));
}

TEST_CASE("pairwise distances match the direct frobenius norm") {
    Matrix a = Matrix::Identity(3, 3);
    Matrix b = a;
    b(0, 1) = b(1, 0) = 1.0;
    Matrix d = pairwise_distances(series_of({a, b}));
    CHECK(d(0, 0) == 0.0);
    CHECK(d(1, 1) == 0.0);
    CHECK(d(0, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(d(1, 0) == d(0, 1));

    std::mt19937 gen(13);
    WindowSet ws = make_windows(gen, 6, 4, 25);
    GraphSeries gs = correlation_graphs(ws);
    Matrix dist = pairwise_distances(gs);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            CHECK(dist(i, j) ==
                  doctest::Approx(testsupport::oracle_frobenius(gs.graphs[static_cast<std::size_t>(i)],
                                                                gs.graphs[static_cast<std::size_t>(j)]))
                      .epsilon(1e-12));
            for (int k = 0; k < 6; ++k)
                CHECK(dist(i, j) <= dist(i, k) + dist(k, j) + 1e-12);
        }
}

TEST_CASE("pairwise distances validate their input") {
    CHECK_THROWS_AS(pairwise_distances(series_of({Matrix::Identity(2, 2)})), ParamError);
    CHECK_THROWS_AS(pairwise_distances(series_of({Matrix::Identity(2, 2), Matrix::Identity(3, 3)})),
                    ShapeError);
}

TEST_CASE("similarity matrix rescales distances into [0, 1]") {
    Matrix d(3, 3);
    d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
    Matrix b = similarity_matrix(d);
    CHECK(b(0, 0) == 1.0);
    CHECK(b(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(b(0, 2) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(b(1, 2) == doctest::Approx(0.5).epsilon(1e-15));

    std::mt19937 gen(14);
    GraphSeries gs = correlation_graphs(make_windows(gen, 5, 4, 20));
    Matrix dist = pairwise_distances(gs);
    Matrix sim = similarity_matrix(dist);
    Matrix ref = testsupport::oracle_similarity(dist);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            CHECK(sim(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-13));
            CHECK(sim(i, j) >= 0.0);
            CHECK(sim(i, j) <= 1.0);
        }
    for (int i = 0; i < 5; ++i) CHECK(sim(i, i) == 1.0);

    CHECK_THROWS_AS(similarity_matrix(Matrix::Zero(3, 3)), ParamError);
}

TEST_CASE("spectral embedding of a 2x2 similarity") {
    Matrix b(2, 2);
    b << 1.0, 0.5, 0.5, 1.0;
    auto [z, sigma] = spectral_embed(b, 1);
    REQUIRE(z.rows() == 2);
    REQUIRE(z.cols() == 1);
    CHECK(sigma[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(z(0, 0) == doctest::Approx(0.8660254037844386).epsilon(1e-12));
    CHECK(z(1, 0) == doctest::Approx(0.8660254037844386).epsilon(1e-12));
}

TEST_CASE("spectral embedding reconstructs a psd similarity at full rank") {
    std::mt19937 gen(15);
    Matrix half = Matrix::Zero(4, 4);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) half(i, j) = normal(gen);
    Matrix b = half * half.transpose(); // PSD by construction
    auto [z, sigma] = spectral_embed(b, 4);
    Matrix recon = z * z.transpose();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(recon(i, j) == doctest::Approx(b(i, j)).epsilon(1e-10));

    // column sign convention: the largest-magnitude entry is nonnegative
    for (int c = 0; c < 4; ++c) {
        int arg = 0;
        for (int r = 1; r < 4; ++r)
            if (std::abs(z(r, c)) > std::abs(z(arg, c))) arg = r;
        CHECK(z(arg, c) >= 0.0);
    }
}

TEST_CASE("spectral embedding agrees with a jacobi eigensolver") {
    std::mt19937 gen(16);
    GraphSeries gs = correlation_graphs(make_windows(gen, 6, 4, 30));
    Matrix b = similarity_matrix(pairwise_distances(gs));
    auto [z, sigma] = spectral_embed(b, 3);
    Vector ref_sigma;
    Matrix ref_z = testsupport::oracle_symmetric_embed(b, 3, &ref_sigma);
    for (int j = 0; j < 3; ++j) {
        CHECK(sigma[j] == doctest::Approx(ref_sigma[j]).epsilon(1e-10));
        for (int i = 0; i < 6; ++i) CHECK(z(i, j) == doctest::Approx(ref_z(i, j)).epsilon(1e-8));
    }
}

TEST_CASE("profile likelihood elbows") {
    std::vector<double> v1 = {10.0, 9.5, 1.0, 0.9, 0.8};
    CHECK(zhu_ghodsi(v1, 1) == 2);

    std::vector<double> v2 = {10.0, 9.5, 1.0, 0.9, 0.02, 0.01};
    CHECK(zhu_ghodsi(v2, 1) == 2);
    CHECK(zhu_ghodsi(v2, 2) == 4);

    // second elbow degenerates to the first when fewer than 2 values remain
    std::vector<double> v3 = {10.0, 9.0, 0.5};
    CHECK(zhu_ghodsi(v3, 1) == 2);
    CHECK(zhu_ghodsi(v3, 2) == 2);

    CHECK_THROWS_AS(zhu_ghodsi(std::vector<double>{1.0, 0.5}, 1), ParamError);
    CHECK_THROWS_AS(zhu_ghodsi(v1, 0), ParamError);
    CHECK_THROWS_AS(zhu_ghodsi(v1, 3), ParamError);
}

TEST_CASE("profile likelihood matches the brute-force oracle") {
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> uni(0.01, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> v(10);
        for (double& x : v) x = uni(gen);
        std::sort(v.begin(), v.end(), std::greater<>());
        CHECK(zhu_ghodsi(v, 1) == testsupport::oracle_profile_split(v));
        CHECK(zhu_ghodsi(v, 2) == testsupport::oracle_second_elbow(v));
    }
}

TEST_CASE("tsg fit populates a consistent model") {
    std::mt19937 gen(18);
    WindowSet ws = make_windows(gen, 8, 4, 30);
    TsgModel model = fit_tsg(ws);

    CHECK(model.training_graphs.size() == 8);
    CHECK(model.channels() == 4);
    CHECK(model.dist_min == 0.0);
    CHECK(model.dist_max > 0.0);
    CHECK(model.d >= 1);
    CHECK(model.d <= 7);
    CHECK(model.embedding.rows() == 8);
    CHECK(model.embedding.cols() == model.d);
    CHECK(model.projector.rows() == model.d);
    CHECK(model.projector.cols() == 8);

    // projector is a left inverse of the embedding
    Matrix ident = model.projector * model.embedding;
    for (int i = 0; i < model.d; ++i)
        for (int j = 0; j < model.d; ++j)
            CHECK(ident(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));

    TsgModel again = fit_tsg(ws);
    CHECK(again.d == model.d);
    CHECK((again.embedding - model.embedding).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(fit_tsg(make_windows(gen, 2, 4, 30)), ParamError);
}

TEST_CASE("tsg fit is invariant to channel relabeling") {
    std::mt19937 gen(19);
    WindowSet ws = make_windows(gen, 6, 5, 25);
    std::vector<int> perm = {4, 2, 0, 1, 3};
    WindowSet permuted = ws;
    for (auto& w : permuted.windows) {
        Matrix p(5, 25);
        for (int i = 0; i < 5; ++i) p.row(i) = w.row(perm[static_cast<std::size_t>(i)]);
        w = p;
    }
    TsgModel a = fit_tsg(ws);
    TsgModel b = fit_tsg(permuted);
    CHECK(a.d == b.d);
    CHECK((a.embedding - b.embedding).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("out-of-sample embedding on a hand-built model") {
    TsgModel model;
    model.embedding.resize(3, 2);
    model.embedding << 1, 0, 0, 1, 1, 1;
    Matrix zt_z = model.embedding.transpose() * model.embedding;
    model.projector = testsupport::oracle_inverse(zt_z) * model.embedding.transpose();
    model.d = 2;
    model.training_graphs.graphs.assign(3, Matrix::Identity(2, 2));

    // rows of a rank-2 gram matrix embed back onto themselves
    Matrix b = model.embedding * model.embedding.transpose();
    for (int k = 0; k < 3; ++k) {
        Vector t = oos_embed_similarity(model, b.col(k));
        CHECK(t[0] == doctest::Approx(model.embedding(k, 0)).epsilon(1e-12));
        CHECK(t[1] == doctest::Approx(model.embedding(k, 1)).epsilon(1e-12));
    }

    Vector zero = oos_embed_similarity(model, Vector::Zero(3));
    CHECK(zero[0] == 0.0);
    CHECK(zero[1] == 0.0);

    // the map is linear in the similarity vector
    Vector s1(3), s2(3);
    s1 << 0.2, 0.5, 0.9;
    s2 << 0.7, 0.1, 0.4;
    Vector sum = oos_embed_similarity(model, s1 + s2);
    Vector parts = oos_embed_similarity(model, s1) + oos_embed_similarity(model, s2);
    CHECK(sum[0] == doctest::Approx(parts[0]).epsilon(1e-12));
    CHECK(sum[1] == doctest::Approx(parts[1]).epsilon(1e-12));
}

TEST_CASE("similarity row clips out-of-range distances") {
    std::mt19937 gen(20);
    WindowSet ws = make_windows(gen, 5, 4, 30);
    TsgModel model = fit_tsg(ws);

    // a training window is at distance dist_min from itself
    Vector s = similarity_row(model, correlation_graph(ws.windows[2]));
    CHECK(s[2] == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k < 5; ++k) {
        CHECK(s[k] >= 0.0);
        CHECK(s[k] <= 1.0);
    }

    // a wildly different graph exceeds dist_max and clips to similarity 0
    Matrix far = -Matrix::Ones(4, 4) + 2.0 * Matrix::Identity(4, 4);
    Vector clipped = similarity_row(model, far);
    double lo = clipped.minCoeff();
    CHECK(lo >= 0.0);
}

TEST_CASE("oos embedding of a training window tracks its training row") {
    std::mt19937 gen(21);
    WindowSet ws = make_windows(gen, 7, 4, 40);
    TsgModel model = fit_tsg(ws);
    Matrix all = oos_embed_all(model, ws);
    REQUIRE(all.rows() == 7);
    REQUIRE(all.cols() == model.d);
    // the discarded spectral tail makes this approximate, not exact
    for (int k = 0; k < 7; ++k) {
        Vector one = oos_embed(model, ws.windows[static_cast<std::size_t>(k)]);
        for (int j = 0; j < model.d; ++j) CHECK(one[j] == all(k, j));
    }
    CHECK((all - model.embedding).cwiseAbs().maxCoeff() < 0.75);

    CHECK_THROWS_AS(oos_embed(model, Matrix::Identity(3, 3)), ShapeError);
}

TEST_CASE("parallel graph computation matches serial") {
    std::mt19937 gen(22);
    WindowSet ws = make_windows(gen, 12, 4, 30);
    GraphSeries serial = correlation_graphs(ws, 1);
    GraphSeries parallel = correlation_graphs(ws, 4);
    REQUIRE(serial.size() == parallel.size());
    for (int k = 0; k < serial.size(); ++k)
        CHECK((serial.graphs[static_cast<std::size_t>(k)] - parallel.graphs[static_cast<std::size_t>(k)])
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
}

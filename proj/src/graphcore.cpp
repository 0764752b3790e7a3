#include "eegfeat/graphcore.hpp"

#include "eegfeat/error.hpp"
#include "eegfeat/parallel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace eegfeat {

namespace {

void fix_column_signs(Matrix& m) {
    for (int j = 0; j < m.cols(); ++j) {
        int at = 0;
        m.col(j).cwiseAbs().maxCoeff(&at);
        if (m(at, j) < 0.0) m.col(j) = -m.col(j);
    }
}

// Best split of one descending segment under the two-Gaussian
// pooled-variance model. Returns (split, log-likelihood).
std::pair<int, double> profile_split(std::span<const double> v) {
    const int n = static_cast<int>(v.size());
    int best_q = 1;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double mu1 = 0.0, mu2 = 0.0;
        for (int i = 0; i < q; ++i) mu1 += v[static_cast<size_t>(i)];
        for (int i = q; i < n; ++i) mu2 += v[static_cast<size_t>(i)];
        mu1 /= q;
        mu2 /= (n - q);
        double ss = 0.0;
        for (int i = 0; i < q; ++i) ss += (v[static_cast<size_t>(i)] - mu1) * (v[static_cast<size_t>(i)] - mu1);
        for (int i = q; i < n; ++i) ss += (v[static_cast<size_t>(i)] - mu2) * (v[static_cast<size_t>(i)] - mu2);
        double var = ss / std::max(n - 2, 1);
        var = std::max(var, 1e-12);
        double ll = -0.5 * n * std::log(2.0 * std::numbers::pi * var) - ss / (2.0 * var);
        if (ll > best_ll) {
            best_ll = ll;
            best_q = q;
        }
    }
    return {best_q, best_ll};
}

} // namespace

Matrix correlation_graph(const Eigen::Ref<const Matrix>& window) {
    const int n_c = static_cast<int>(window.rows());
    const int w = static_cast<int>(window.cols());
    if (w < 2) throw ParamError("correlation graph needs at least 2 samples per window");
    Matrix centered = window.colwise() - window.rowwise().mean();
    Vector norms = centered.rowwise().norm();
    Matrix a = Matrix::Identity(n_c, n_c);
    for (int i = 0; i < n_c; ++i) {
        if (norms[i] == 0.0) continue;
        for (int j = i + 1; j < n_c; ++j) {
            if (norms[j] == 0.0) continue;
            double r = centered.row(i).dot(centered.row(j)) / (norms[i] * norms[j]);
            r = std::clamp(r, -1.0, 1.0);
            a(i, j) = r;
            a(j, i) = r;
        }
    }
    return a;
}

GraphSeries correlation_graphs(const WindowSet& ws, int jobs) {
    GraphSeries gs;
    gs.graphs.resize(ws.size());
    parallel_for(ws.size(), jobs, [&](size_t k) { gs.graphs[k] = correlation_graph(ws.windows[k]); });
    return gs;
}

Matrix pairwise_distances(const GraphSeries& gs) {
    const int n = gs.size();
    if (n < 2) throw ParamError("pairwise distances need at least 2 graphs");
    const int n_c = gs.channels();
    for (const Matrix& g : gs.graphs)
        if (g.rows() != n_c || g.cols() != n_c)
            throw ShapeError("graph series contains mismatched graph sizes");
    Matrix d = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k)
        for (int k2 = k + 1; k2 < n; ++k2) {
            double dist = (gs.graphs[static_cast<size_t>(k)] - gs.graphs[static_cast<size_t>(k2)]).norm();
            d(k, k2) = dist;
            d(k2, k) = dist;
        }
    return d;
}

Matrix similarity_matrix(const Matrix& distances) {
    const double lo = distances.minCoeff();
    const double hi = distances.maxCoeff();
    if (!(hi > lo)) throw ParamError("all pairwise graph distances are equal; similarity is degenerate");
    return (1.0 - (distances.array() - lo) / (hi - lo)).matrix();
}

std::pair<Matrix, Vector> spectral_embed(const Matrix& B, int d) {
    const int n = static_cast<int>(B.rows());
    if (B.cols() != n) throw ShapeError("similarity matrix must be square");
    if (d < 1 || d > n)
        throw ParamError("embedding dimension " + std::to_string(d) + " outside [1, " + std::to_string(n) + "]");
    Eigen::BDCSVD<Matrix> svd(B, Eigen::ComputeThinU);
    Vector sigma = svd.singularValues().head(d);
    Matrix zhat = svd.matrixU().leftCols(d) * sigma.cwiseSqrt().asDiagonal();
    fix_column_signs(zhat);
    return {std::move(zhat), std::move(sigma)};
}

int zhu_ghodsi(std::span<const double> values, int elbow_index) {
    if (values.size() < 3) throw ParamError("Zhu-Ghodsi needs at least 3 values");
    if (elbow_index != 1 && elbow_index != 2) throw ParamError("elbow index must be 1 or 2");
    const int q1 = profile_split(values).first;
    if (elbow_index == 1) return q1;
    std::span<const double> tail = values.subspan(static_cast<size_t>(q1));
    if (tail.size() < 2) return q1;
    return q1 + profile_split(tail).first;
}

TsgModel fit_tsg(const WindowSet& ws, int jobs) {
    if (ws.size() < 3) throw ParamError("TSG fit needs at least 3 windows");
    return fit_tsg_graphs(correlation_graphs(ws, jobs));
}

TsgModel fit_tsg_graphs(GraphSeries gs) {
    const int n = gs.size();
    if (n < 3) throw ParamError("TSG fit needs at least 3 windows");
    Matrix distances = pairwise_distances(gs);
    TsgModel model;
    model.training_graphs = std::move(gs);
    model.dist_min = distances.minCoeff();
    model.dist_max = distances.maxCoeff();
    Matrix b = similarity_matrix(distances);

    Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU);
    const Vector& all_sigma = svd.singularValues();
    std::vector<double> positive;
    const double floor = all_sigma[0] * 1e-12;
    for (int i = 0; i < all_sigma.size(); ++i)
        if (all_sigma[i] > floor) positive.push_back(all_sigma[i]);

    int d = positive.size() >= 3 ? zhu_ghodsi(positive, 2) : static_cast<int>(positive.size());
    d = std::clamp(d, 1, n - 1);
    model.d = d;
    model.singular_values = all_sigma.head(d);
    model.embedding = svd.matrixU().leftCols(d) * model.singular_values.cwiseSqrt().asDiagonal();
    fix_column_signs(model.embedding);
    model.projector = (model.embedding.transpose() * model.embedding)
                          .ldlt()
                          .solve(model.embedding.transpose());
    return model;
}

Vector similarity_row(const TsgModel& model, const Eigen::Ref<const Matrix>& graph) {
    const int n_c = model.channels();
    if (graph.rows() != n_c || graph.cols() != n_c)
        throw ShapeError("graph has " + std::to_string(graph.rows()) + " channels, model expects " +
                         std::to_string(n_c));
    const double span = model.dist_max - model.dist_min;
    Vector s(model.training_graphs.size());
    for (int k = 0; k < model.training_graphs.size(); ++k) {
        double dist = (graph - model.training_graphs.graphs[static_cast<size_t>(k)]).norm();
        dist = std::clamp(dist, model.dist_min, model.dist_max);
        s[k] = 1.0 - (dist - model.dist_min) / span;
    }
    return s;
}

Vector oos_embed_similarity(const TsgModel& model, const Eigen::Ref<const Vector>& similarities) {
    if (similarities.size() != model.training_graphs.size())
        throw ShapeError("similarity row length does not match the training window count");
    return model.projector * similarities;
}

Vector oos_embed(const TsgModel& model, const Eigen::Ref<const Matrix>& window) {
    if (window.rows() != model.channels())
        throw ShapeError("window has " + std::to_string(window.rows()) + " channels, model expects " +
                         std::to_string(model.channels()));
    return oos_embed_similarity(model, similarity_row(model, correlation_graph(window)));
}

Matrix oos_embed_all(const TsgModel& model, const WindowSet& ws, int jobs) {
    Matrix out(ws.size(), model.d);
    parallel_for(ws.size(), jobs, [&](size_t k) { out.row(k) = oos_embed(model, ws.windows[k]).transpose(); });
    return out;
}

} // namespace eegfeat

#ifndef EEGFEAT_GRAPHCORE_HPP
#define EEGFEAT_GRAPHCORE_HPP

#include "eegfeat/types.hpp"
#include "eegfeat/windowing.hpp"

#include <span>
#include <utility>
#include <vector>

namespace eegfeat {

// Ordered collection of per-window channel-correlation graphs.
struct GraphSeries {
    std::vector<Matrix> graphs;

    int size() const { return static_cast<int>(graphs.size()); }
    int channels() const { return graphs.empty() ? 0 : static_cast<int>(graphs.front().rows()); }
};

// Pearson correlation matrix of the window's channels. Zero-variance
// channels correlate 0 with everything; the diagonal is always 1.
Matrix correlation_graph(const Eigen::Ref<const Matrix>& window);

GraphSeries correlation_graphs(const WindowSet& ws, int jobs = 1);

// Frobenius distances between all graph pairs: symmetric, zero diagonal.
Matrix pairwise_distances(const GraphSeries& gs);

// B[k][k'] = 1 - (D[k][k'] - min) / (max - min) with min/max taken over all
// entries of D, diagonal included, so min = 0 and the diagonal of B is 1.
Matrix similarity_matrix(const Matrix& distances);

// Truncated adjacency spectral embedding: Zhat = U_d Sigma_d^{1/2} from the
// SVD of B. Each column is sign-fixed so its largest-magnitude entry is
// nonnegative. Returns (Zhat, leading singular values).
std::pair<Matrix, Vector> spectral_embed(const Matrix& B, int d);

// Profile-likelihood elbow of a descending scree. Each candidate split
// models the two segments as Gaussians with a pooled variance; the split
// maximizing the likelihood wins (smallest index on ties). elbow_index = 2
// finds a second elbow in the values past the first.
int zhu_ghodsi(std::span<const double> values, int elbow_index);

struct TsgModel {
    GraphSeries training_graphs;
    double dist_min = 0.0;
    double dist_max = 0.0;
    Matrix embedding;       // n_w x d
    Vector singular_values; // length d
    int d = 0;
    Matrix projector;       // d x n_w, (Zhat^T Zhat)^{-1} Zhat^T

    int channels() const { return training_graphs.channels(); }
};

// Full TSG fit: graphs -> distances -> similarity -> embedding with the
// dimension chosen at the second Zhu-Ghodsi elbow of B's singular values.
TsgModel fit_tsg(const WindowSet& ws, int jobs = 1);

// Same fit starting from precomputed graphs (the subset search reuses
// cached graphs restricted to channel subsets).
TsgModel fit_tsg_graphs(GraphSeries gs);

// Similarities s'(A, A^(k)) against every training graph; out-of-sample
// distances are clipped into [dist_min, dist_max] before normalizing.
Vector similarity_row(const TsgModel& model, const Eigen::Ref<const Matrix>& graph);

// The weighted sum of Eq-2: projector * similarities.
Vector oos_embed_similarity(const TsgModel& model, const Eigen::Ref<const Vector>& similarities);

// Out-of-sample embedding of one window.
Vector oos_embed(const TsgModel& model, const Eigen::Ref<const Matrix>& window);

// Row-per-window embedding of a whole set.
Matrix oos_embed_all(const TsgModel& model, const WindowSet& ws, int jobs = 1);

} // namespace eegfeat

#endif

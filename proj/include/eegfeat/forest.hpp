#ifndef EEGFEAT_FOREST_HPP
#define EEGFEAT_FOREST_HPP

#include "eegfeat/types.hpp"

#include <cstdint>
#include <vector>

namespace eegfeat {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;         // 0 = grow until pure / min_samples_split
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    int max_features = 0;      // 0 = floor(sqrt(p)), at least 1
};

// Flat node storage; node 0 is the root. feature = -1 marks a leaf, whose
// class counts (n0, n1) yield the posterior n1 / (n0 + n1), or 0.5 when the
// leaf holds no samples.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::int64_t n0 = 0;
    std::int64_t n1 = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;
};

struct Forest {
    std::vector<Tree> trees;
    int n_features = 0;
    ForestParams params;
    std::uint64_t seed = 0;
};

// Bagged CART ensemble with Gini splits: bootstrap of size n per tree,
// sqrt(p) feature candidates per node, midpoint thresholds, x <= t to the
// left. Fully determined by (X, y, params, seed).
Forest train_forest(const Matrix& X, const std::vector<int>& y, const ForestParams& params,
                    std::uint64_t seed, int jobs = 1);

// Mean over trees of the reached leaf's positive-class posterior.
Vector predict_posterior(const Forest& forest, const Matrix& X, int jobs = 1);

// Labels from posteriors; ties at exactly 0.5 go to class 1.
std::vector<int> posterior_labels(const Vector& posterior);

double balanced_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred);
double standard_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Transfer mechanism: keep every tree's structure, recompute each leaf's
// counts from (X_new, y_new) alone. Leaves no new sample reaches report the
// neutral posterior 0.5.
Forest fine_tune(const Forest& forest, const Matrix& X_new, const std::vector<int>& y_new);

// Hash of split structure only (features, thresholds, topology); leaf counts
// are excluded so fine-tuning must preserve it.
std::uint64_t structure_hash(const Forest& forest);

} // namespace eegfeat

#endif

#include "eegfeat/forest.hpp"

#include "eegfeat/error.hpp"
#include "eegfeat/parallel.hpp"
#include "eegfeat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

namespace eegfeat {

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

double gini_pair(std::int64_t c0, std::int64_t c1) {
    const double n = static_cast<double>(c0 + c1);
    const double p0 = c0 / n;
    const double p1 = c1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const std::vector<int>& y, const ForestParams& params,
                int max_features, Rng& rng)
        : x_(x), y_(y), params_(params), max_features_(max_features), rng_(rng) {}

    Tree build(std::vector<int> samples) {
        tree_.nodes.clear();
        grow(std::move(samples), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<int> samples, int depth) {
        std::int64_t c1 = 0;
        for (int i : samples) c1 += y_[static_cast<size_t>(i)];
        const std::int64_t c0 = static_cast<std::int64_t>(samples.size()) - c1;

        const int node_id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        const bool pure = c0 == 0 || c1 == 0;
        const bool too_small = static_cast<int>(samples.size()) < params_.min_samples_split;
        const bool too_deep = params_.max_depth > 0 && depth >= params_.max_depth;
        Split split;
        if (!pure && !too_small && !too_deep) split = best_split(samples, c0, c1);

        if (split.feature < 0) {
            tree_.nodes[static_cast<size_t>(node_id)].n0 = c0;
            tree_.nodes[static_cast<size_t>(node_id)].n1 = c1;
            return node_id;
        }

        std::vector<int> left, right;
        left.reserve(samples.size());
        right.reserve(samples.size());
        for (int i : samples)
            (x_(i, split.feature) <= split.threshold ? left : right).push_back(i);
        samples.clear();
        samples.shrink_to_fit();

        const int left_id = grow(std::move(left), depth + 1);
        const int right_id = grow(std::move(right), depth + 1);
        TreeNode& node = tree_.nodes[static_cast<size_t>(node_id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left_id;
        node.right = right_id;
        return node_id;
    }

    Split best_split(const std::vector<int>& samples, std::int64_t c0, std::int64_t c1) {
        const int p = static_cast<int>(x_.cols());
        std::vector<int> order(static_cast<size_t>(p));
        std::iota(order.begin(), order.end(), 0);
        rng_.shuffle(order);

        const double n = static_cast<double>(samples.size());
        Split best;
        int evaluated = 0;
        std::vector<std::pair<double, int>> vals(samples.size());
        for (int f : order) {
            if (evaluated >= max_features_) break;
            for (size_t i = 0; i < samples.size(); ++i)
                vals[i] = {x_(samples[i], f), y_[static_cast<size_t>(samples[i])]};
            std::sort(vals.begin(), vals.end());
            if (vals.front().first == vals.back().first) continue; // constant here; not counted
            ++evaluated;

            std::int64_t l0 = 0, l1 = 0;
            for (size_t i = 0; i + 1 < vals.size(); ++i) {
                l1 += vals[i].second;
                l0 += 1 - vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue;
                const std::int64_t nl = l0 + l1;
                const std::int64_t nr = static_cast<std::int64_t>(vals.size()) - nl;
                if (nl < params_.min_samples_leaf || nr < params_.min_samples_leaf) continue;
                const double impurity =
                    (nl * gini_pair(l0, l1) + nr * gini_pair(c0 - l0, c1 - l1)) / n;
                if (impurity < best.impurity) {
                    double thr = vals[i].first / 2.0 + vals[i + 1].first / 2.0;
                    if (thr == vals[i + 1].first) thr = vals[i].first;
                    best = {f, thr, impurity};
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    const std::vector<int>& y_;
    const ForestParams& params_;
    int max_features_;
    Rng& rng_;
    Tree tree_;
};

int route_to_leaf(const Tree& tree, const Eigen::Ref<const Matrix>& x, Eigen::Index row) {
    int node = 0;
    while (tree.nodes[static_cast<size_t>(node)].feature >= 0) {
        const TreeNode& n = tree.nodes[static_cast<size_t>(node)];
        node = x(row, n.feature) <= n.threshold ? n.left : n.right;
    }
    return node;
}

double leaf_posterior(const TreeNode& leaf) {
    const std::int64_t total = leaf.n0 + leaf.n1;
    if (total == 0) return 0.5;
    return static_cast<double>(leaf.n1) / static_cast<double>(total);
}

void check_labels_binary(const std::vector<int>& y) {
    for (int v : y)
        if (v != 0 && v != 1) throw ParamError("labels must be 0 or 1");
}

} // namespace

Forest train_forest(const Matrix& X, const std::vector<int>& y, const ForestParams& params,
                    std::uint64_t seed, int jobs) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (n < 2) throw ParamError("forest training needs at least 2 samples");
    if (static_cast<int>(y.size()) != n) throw ShapeError("label count does not match row count");
    check_labels_binary(y);
    const std::int64_t ones = std::accumulate(y.begin(), y.end(), std::int64_t{0});
    if (ones == 0 || ones == n) throw ParamError("forest training requires both classes present");
    if (params.n_trees < 1) throw ParamError("forest needs at least 1 tree");

    const int max_features =
        params.max_features > 0 ? std::min(params.max_features, p)
                                : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(p))));

    Forest forest;
    forest.n_features = p;
    forest.params = params;
    forest.seed = seed;
    forest.trees.resize(static_cast<size_t>(params.n_trees));
    parallel_for(static_cast<size_t>(params.n_trees), jobs, [&](size_t t) {
        Rng rng(derive_seed(seed, "tree", t));
        std::vector<int> boot(static_cast<size_t>(n));
        for (int& idx : boot) idx = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        TreeBuilder builder(X, y, params, max_features, rng);
        forest.trees[t] = builder.build(std::move(boot));
    });
    return forest;
}

Vector predict_posterior(const Forest& forest, const Matrix& X, int jobs) {
    if (X.cols() != forest.n_features)
        throw ShapeError("input has " + std::to_string(X.cols()) + " features, forest expects " +
                         std::to_string(forest.n_features));
    Vector out = Vector::Zero(X.rows());
    parallel_for(static_cast<size_t>(X.rows()), jobs, [&](size_t i) {
        double acc = 0.0;
        for (const Tree& tree : forest.trees)
            acc += leaf_posterior(tree.nodes[static_cast<size_t>(
                route_to_leaf(tree, X, static_cast<Eigen::Index>(i)))]);
        out[static_cast<Eigen::Index>(i)] = acc / static_cast<double>(forest.trees.size());
    });
    return out;
}

std::vector<int> posterior_labels(const Vector& posterior) {
    std::vector<int> labels(static_cast<size_t>(posterior.size()));
    for (Eigen::Index i = 0; i < posterior.size(); ++i)
        labels[static_cast<size_t>(i)] = posterior[i] >= 0.5 ? 1 : 0;
    return labels;
}

double balanced_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size()) throw ShapeError("label vectors differ in length");
    if (y_true.empty()) throw ParamError("balanced accuracy of empty labels is undefined");
    std::int64_t n0 = 0, n1 = 0, hit0 = 0, hit1 = 0;
    for (size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 1) {
            ++n1;
            hit1 += y_pred[i] == 1;
        } else {
            ++n0;
            hit0 += y_pred[i] == 0;
        }
    }
    if (n0 == 0 || n1 == 0)
        throw ParamError("balanced accuracy undefined: y_true contains a single class");
    return 0.5 * (static_cast<double>(hit0) / n0 + static_cast<double>(hit1) / n1);
}

double standard_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size()) throw ShapeError("label vectors differ in length");
    if (y_true.empty()) throw ParamError("accuracy of empty labels is undefined");
    std::int64_t hits = 0;
    for (size_t i = 0; i < y_true.size(); ++i) hits += y_true[i] == y_pred[i];
    return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

Forest fine_tune(const Forest& forest, const Matrix& X_new, const std::vector<int>& y_new) {
    if (X_new.rows() > 0 && X_new.cols() != forest.n_features)
        throw ShapeError("fine-tune data has " + std::to_string(X_new.cols()) +
                         " features, forest expects " + std::to_string(forest.n_features));
    if (static_cast<size_t>(X_new.rows()) != y_new.size())
        throw ShapeError("fine-tune label count does not match row count");
    check_labels_binary(y_new);

    Forest tuned = forest;
    for (Tree& tree : tuned.trees)
        for (TreeNode& node : tree.nodes)
            if (node.feature < 0) {
                node.n0 = 0;
                node.n1 = 0;
            }
    for (Tree& tree : tuned.trees)
        for (Eigen::Index i = 0; i < X_new.rows(); ++i) {
            TreeNode& leaf = tree.nodes[static_cast<size_t>(route_to_leaf(tree, X_new, i))];
            if (y_new[static_cast<size_t>(i)] == 1)
                ++leaf.n1;
            else
                ++leaf.n0;
        }
    return tuned;
}

std::uint64_t structure_hash(const Forest& forest) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffull;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(forest.trees.size()));
    mix(static_cast<std::uint64_t>(forest.n_features));
    for (const Tree& tree : forest.trees) {
        mix(static_cast<std::uint64_t>(tree.nodes.size()));
        for (const TreeNode& node : tree.nodes) {
            mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(node.feature)));
            std::uint64_t bits;
            std::memcpy(&bits, &node.threshold, sizeof bits);
            mix(bits);
            mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(node.left)));
            mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(node.right)));
        }
    }
    return h;
}

} // namespace eegfeat

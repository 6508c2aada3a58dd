#pragma once

#include "triage/data/dataset.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace triage::cart {

// Every count used by training is a class-weighted count.
using data::ClassWeights;

struct TreeHyperparams {
    std::size_t max_depth = 10;
    double min_impurity = 0.0; // a node at or below this impurity is not split
    std::size_t min_pool = 2;  // a node with fewer samples is not split
    ClassWeights class_weights;

    void validate() const;
    bool operator==(const TreeHyperparams&) const = default;
};

// 1 - p+^2 - p-^2 for weighted class masses.
double gini(double w_positive, double w_negative);

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double expected_impurity = 0.0;
};

// Exhaustive search over the candidate features and every midpoint between
// consecutive distinct values in the pool. Minimizes expected child impurity;
// ties go to the lowest feature id, then the lowest threshold. Returns nullopt
// when no split lowers the pool's impurity. `pool` may repeat rows.
std::optional<Split> best_split(std::span<const std::size_t> pool, const data::Dataset& data,
                                std::span<const std::size_t> candidate_features, const ClassWeights& weights);

struct TreeNode {
    // internal nodes: x[feature] <= threshold goes to `left`, otherwise `right`
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;

    double pool_fraction = 1.0;   // weighted share of the training pool reaching this node
    std::size_t samples = 0;      // unweighted row count (bootstrap duplicates included)
    double weight_positive = 0.0; // weighted class masses
    double weight_negative = 0.0;
    double impurity = 0.0;
    std::size_t depth = 0;

    [[nodiscard]] bool is_leaf() const noexcept { return left < 0; }
    // weighted majority; an exact tie goes to +1
    [[nodiscard]] int dominant_class() const noexcept
    {
        return weight_positive >= weight_negative ? data::kPositive : data::kNegative;
    }
    bool operator==(const TreeNode&) const = default;
};

// Fitted CART tree stored as a flat node array in depth-first preorder;
// nodes[0] is the root.
class TreeModel {
public:
    TreeModel() = default;
    // Validates structure (two children per internal node, feature ids in
    // range) and derives the Gini importance from the nodes.
    TreeModel(std::vector<TreeNode> nodes, std::size_t n_features, std::uint64_t schema_digest,
              TreeHyperparams hyperparams);

    [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t n_features() const noexcept { return n_features_; }
    [[nodiscard]] std::uint64_t schema_digest() const noexcept { return schema_digest_; }
    [[nodiscard]] const TreeHyperparams& hyperparams() const noexcept { return hyperparams_; }
    [[nodiscard]] const std::vector<double>& importance() const noexcept { return importance_; }
    [[nodiscard]] std::size_t depth() const noexcept;

    // Node reached by x. A depth limit stops the descent early, which is
    // exactly the tree that training with max_depth = limit would produce.
    [[nodiscard]] const TreeNode& descend(std::span<const double> x,
                                          std::size_t depth_limit = SIZE_MAX) const;

    [[nodiscard]] int predict(std::span<const double> x, std::size_t depth_limit = SIZE_MAX) const
    {
        return descend(x, depth_limit).dominant_class();
    }

    // (w+ - w-) / (w+ + w-) at the reached node; >= 0 exactly when predict is +1.
    [[nodiscard]] double score(std::span<const double> x, std::size_t depth_limit = SIZE_MAX) const;

    // Indented rules with threshold, sample share and dominant class per node.
    [[nodiscard]] std::string render(const data::FeatureSchema& schema) const;

    bool operator==(const TreeModel&) const = default;

private:
    std::vector<TreeNode> nodes_;
    std::size_t n_features_ = 0;
    std::uint64_t schema_digest_ = 0;
    TreeHyperparams hyperparams_;
    std::vector<double> importance_;
};

// Supplies the candidate features for a node. The key identifies the node by
// its path from the root, so the answer does not depend on visiting order.
using FeatureSampler = std::function<std::vector<std::size_t>(std::uint64_t node_key)>;

// Root key of a tree; children derive theirs with child_key.
inline constexpr std::uint64_t kRootKey = 0x9e3779b97f4a7c15ULL;
std::uint64_t child_key(std::uint64_t parent, bool right) noexcept;

TreeModel fit_tree(const data::Dataset& train, const TreeHyperparams& hp, const FeatureSampler& sampler = {});

// Fits on the given rows of `train` (repeats allowed, e.g. a bootstrap draw).
TreeModel fit_tree(const data::Dataset& train, std::span<const std::size_t> rows, const TreeHyperparams& hp,
                   const FeatureSampler& sampler = {}, std::uint64_t root_key = kRootKey);

// Gini importance of the fitted tree, L1-normalized (all zero without splits).
const std::vector<double>& tree_importance(const TreeModel& model);

} // namespace triage::cart

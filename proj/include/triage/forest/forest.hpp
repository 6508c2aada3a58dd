#pragma once

#include "triage/cart/tree.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace triage::forest {

// Size of the random feature subset offered to each split.
enum class MaxFeatures { all, sqrt, log2 };

std::string_view to_string(MaxFeatures m) noexcept;
MaxFeatures max_features_from_string(std::string_view s);

// ceil(d), ceil(sqrt(d)) or ceil(log2(d)), at least 1.
std::size_t features_per_node(MaxFeatures m, std::size_t d);

struct ForestHyperparams {
    std::size_t n_tree = 100;
    MaxFeatures max_features = MaxFeatures::sqrt;
    cart::TreeHyperparams tree;
    std::uint64_t seed = 0;
    bool bootstrap = true; // off only in tests: every member then sees the full training set

    void validate() const;
    bool operator==(const ForestHyperparams&) const = default;
};

// A bootstrap draw that misses a class is redrawn at most this many times in total.
inline constexpr int kMaxBootstrapDraws = 16;

class ForestModel {
public:
    ForestModel() = default;
    ForestModel(std::vector<cart::TreeModel> trees, ForestHyperparams hp);

    [[nodiscard]] const std::vector<cart::TreeModel>& trees() const noexcept { return trees_; }
    [[nodiscard]] const ForestHyperparams& hyperparams() const noexcept { return hp_; }
    [[nodiscard]] std::size_t n_features() const noexcept { return trees_.front().n_features(); }
    [[nodiscard]] std::uint64_t schema_digest() const noexcept { return trees_.front().schema_digest(); }

    // Sum of member votes (+1/-1) over the first `n_trees` members, each
    // descending at most `depth_limit` levels.
    [[nodiscard]] long vote_sum(std::span<const double> x, std::size_t n_trees = SIZE_MAX,
                                std::size_t depth_limit = SIZE_MAX) const;

    // Majority vote; a tie goes to +1.
    [[nodiscard]] int predict(std::span<const double> x, std::size_t n_trees = SIZE_MAX,
                              std::size_t depth_limit = SIZE_MAX) const
    {
        return vote_sum(x, n_trees, depth_limit) >= 0 ? data::kPositive : data::kNegative;
    }

    // Vote margin in [-1, 1].
    [[nodiscard]] double score(std::span<const double> x, std::size_t n_trees = SIZE_MAX,
                               std::size_t depth_limit = SIZE_MAX) const;

    bool operator==(const ForestModel&) const = default;

private:
    std::vector<cart::TreeModel> trees_;
    ForestHyperparams hp_;
};

// Seed of member `index`; members never share a stream and adding trees does
// not change earlier ones.
std::uint64_t tree_seed(std::uint64_t root_seed, std::size_t index) noexcept;

// Fits member `index` exactly as fit_forest would.
cart::TreeModel fit_member(const data::Dataset& train, const ForestHyperparams& hp, std::size_t index);

ForestModel fit_forest(const data::Dataset& train, const ForestHyperparams& hp);

} // namespace triage::forest

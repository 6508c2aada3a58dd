#include "triage/forest/forest.hpp"

#include "triage/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace triage::forest {

std::string_view to_string(MaxFeatures m) noexcept
{
    switch (m) {
    case MaxFeatures::all: return "all";
    case MaxFeatures::sqrt: return "sqrt";
    case MaxFeatures::log2: return "log2";
    }
    return "all";
}

MaxFeatures max_features_from_string(std::string_view s)
{
    if (s == "all") {
        return MaxFeatures::all;
    }
    if (s == "sqrt") {
        return MaxFeatures::sqrt;
    }
    if (s == "log2") {
        return MaxFeatures::log2;
    }
    throw Error(ErrorKind::contract, "unknown max_features '" + std::string(s) + "' (all, sqrt, log2)");
}

std::size_t features_per_node(MaxFeatures m, std::size_t d)
{
    double k = static_cast<double>(d);
    switch (m) {
    case MaxFeatures::all: break;
    case MaxFeatures::sqrt: k = std::sqrt(k); break;
    case MaxFeatures::log2: k = d > 0 ? std::log2(k) : 0.0; break;
    }
    // exact roots and powers of two should not round up past themselves
    const auto r = static_cast<std::size_t>(std::ceil(k - 1e-12));
    return std::clamp<std::size_t>(r, 1, std::max<std::size_t>(d, 1));
}

void ForestHyperparams::validate() const
{
    if (n_tree < 1) {
        throw Error(ErrorKind::contract, "n_tree must be at least 1");
    }
    tree.validate();
}

ForestModel::ForestModel(std::vector<cart::TreeModel> trees, ForestHyperparams hp)
    : trees_(std::move(trees)), hp_(hp)
{
    hp_.validate();
    if (trees_.size() != hp_.n_tree) {
        throw Error(ErrorKind::contract, "forest has " + std::to_string(trees_.size()) + " trees, n_tree is " +
                                             std::to_string(hp_.n_tree));
    }
    for (const auto& t : trees_) {
        if (t.n_features() != trees_.front().n_features() || t.schema_digest() != trees_.front().schema_digest()) {
            throw Error(ErrorKind::dimension, "forest members disagree on the feature layout");
        }
        if (!(t.hyperparams() == hp_.tree)) {
            throw Error(ErrorKind::contract, "forest members must share the tree hyperparameters");
        }
    }
}

long ForestModel::vote_sum(std::span<const double> x, std::size_t n_trees, std::size_t depth_limit) const
{
    const std::size_t n = std::min(n_trees, trees_.size());
    long sum = 0;
    for (std::size_t t = 0; t < n; ++t) {
        sum += trees_[t].predict(x, depth_limit);
    }
    return sum;
}

double ForestModel::score(std::span<const double> x, std::size_t n_trees, std::size_t depth_limit) const
{
    const std::size_t n = std::min(n_trees, trees_.size());
    return static_cast<double>(vote_sum(x, n, depth_limit)) / static_cast<double>(n);
}

std::uint64_t tree_seed(std::uint64_t root_seed, std::size_t index) noexcept
{
    // splitmix64 step: well-separated streams for consecutive indices
    std::uint64_t z = root_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

cart::TreeModel fit_member(const data::Dataset& train, const ForestHyperparams& hp, std::size_t index)
{
    const std::size_t n = train.n_samples();
    const std::size_t d = train.n_features();
    const std::uint64_t seed = tree_seed(hp.seed, index);
    std::mt19937_64 rng(seed);

    std::vector<std::size_t> rows(n);
    if (hp.bootstrap) {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        bool ok = false;
        for (int attempt = 0; attempt < kMaxBootstrapDraws && !ok; ++attempt) {
            bool pos = false;
            bool neg = false;
            for (auto& r : rows) {
                r = pick(rng);
                (train.label(r) > 0 ? pos : neg) = true;
            }
            ok = pos && neg;
        }
        if (!ok) {
            throw Error(ErrorKind::fit, "random forest: " + std::to_string(kMaxBootstrapDraws) +
                                            " bootstrap draws in a row contained a single class");
        }
    } else {
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    }

    const std::size_t k = features_per_node(hp.max_features, d);
    cart::FeatureSampler sampler;
    if (k < d) {
        sampler = [seed, d, k](std::uint64_t node_key) {
            std::mt19937_64 node_rng(seed ^ node_key);
            std::vector<std::size_t> ids(d);
            std::iota(ids.begin(), ids.end(), std::size_t{0});
            for (std::size_t i = 0; i < k; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, d - 1);
                std::swap(ids[i], ids[pick(node_rng)]);
            }
            ids.resize(k);
            std::sort(ids.begin(), ids.end());
            return ids;
        };
    }
    return cart::fit_tree(train, rows, hp.tree, sampler);
}

ForestModel fit_forest(const data::Dataset& train, const ForestHyperparams& hp)
{
    hp.validate();
    data::require_both_classes(train, "random forest");
    std::vector<cart::TreeModel> trees;
    trees.reserve(hp.n_tree);
    for (std::size_t t = 0; t < hp.n_tree; ++t) {
        trees.push_back(fit_member(train, hp, t));
    }
    return ForestModel(std::move(trees), hp);
}

} // namespace triage::forest

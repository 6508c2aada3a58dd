#include "triage/cart/tree.hpp"

#include "triage/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace triage::cart {

namespace {

// Two objectives closer than this are treated as equal, so the tie rule and
// not rounding noise decides between mathematically equivalent splits.
constexpr double kTieTolerance = 1e-12;

struct Entry {
    double value;
    int label;
};

struct PoolCounts {
    std::size_t positive = 0;
    std::size_t negative = 0;
};

PoolCounts count_pool(std::span<const std::size_t> pool, const data::Dataset& data)
{
    PoolCounts c;
    for (std::size_t r : pool) {
        (data.label(r) > 0 ? c.positive : c.negative) += 1;
    }
    return c;
}

// Sum of squared class masses over the side mass: W * (1 - g).
double purity_mass(double wp, double wn)
{
    const double w = wp + wn;
    return w > 0.0 ? (wp * wp + wn * wn) / w : 0.0;
}

std::optional<Split> search(std::span<const std::size_t> pool, const data::Dataset& data,
                            std::span<const std::size_t> features, const ClassWeights& weights,
                            std::vector<Entry>& scratch)
{
    if (pool.size() < 2) {
        return std::nullopt;
    }
    const PoolCounts total = count_pool(pool, data);
    const double wp_total = static_cast<double>(total.positive) * weights.positive;
    const double wn_total = static_cast<double>(total.negative) * weights.negative;
    const double w_total = wp_total + wn_total;
    const double node_impurity = gini(wp_total, wn_total);
    if (node_impurity <= 0.0) {
        return std::nullopt;
    }

    // ascending ids so that the first of tied splits is the lowest feature
    std::vector<std::size_t> order(features.begin(), features.end());
    std::sort(order.begin(), order.end());

    std::optional<Split> best;
    double best_objective = 0.0;
    for (std::size_t f : order) {
        scratch.clear();
        for (std::size_t r : pool) {
            scratch.push_back({data.at(r, f), data.label(r)});
        }
        std::sort(scratch.begin(), scratch.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });

        std::size_t left_pos = 0;
        std::size_t left_neg = 0;
        for (std::size_t k = 0; k + 1 < scratch.size(); ++k) {
            (scratch[k].label > 0 ? left_pos : left_neg) += 1;
            const double lo = scratch[k].value;
            const double hi = scratch[k + 1].value;
            if (!(lo < hi)) {
                continue;
            }
            const double wpl = static_cast<double>(left_pos) * weights.positive;
            const double wnl = static_cast<double>(left_neg) * weights.negative;
            const double wpr = static_cast<double>(total.positive - left_pos) * weights.positive;
            const double wnr = static_cast<double>(total.negative - left_neg) * weights.negative;
            const double objective = 1.0 - (purity_mass(wpl, wnl) + purity_mass(wpr, wnr)) / w_total;
            if (!best || objective < best_objective - kTieTolerance) {
                double threshold = lo + (hi - lo) / 2.0;
                if (!(threshold < hi)) {
                    threshold = lo;
                }
                best = Split{f, threshold, objective};
                best_objective = objective;
            }
        }
    }
    if (best && best->expected_impurity < node_impurity - kTieTolerance) {
        return best;
    }
    return std::nullopt;
}

class Builder {
public:
    Builder(const data::Dataset& data, const TreeHyperparams& hp, const FeatureSampler& sampler, double root_mass)
        : data_(data), hp_(hp), sampler_(sampler), root_mass_(root_mass)
    {
        all_features_.resize(data.n_features());
        std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
    }

    std::int32_t build(std::vector<std::size_t> pool, std::size_t depth, std::uint64_t key)
    {
        const PoolCounts counts = count_pool(pool, data_);
        TreeNode node;
        node.samples = pool.size();
        node.weight_positive = static_cast<double>(counts.positive) * hp_.class_weights.positive;
        node.weight_negative = static_cast<double>(counts.negative) * hp_.class_weights.negative;
        node.pool_fraction = (node.weight_positive + node.weight_negative) / root_mass_;
        node.impurity = gini(node.weight_positive, node.weight_negative);
        node.depth = depth;

        const auto index = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(node);

        if (depth >= hp_.max_depth || pool.size() < hp_.min_pool || node.impurity <= hp_.min_impurity) {
            return index;
        }
        std::vector<std::size_t> sampled;
        std::span<const std::size_t> candidates = all_features_;
        if (sampler_) {
            sampled = sampler_(key);
            candidates = sampled;
        }
        const auto split = search(pool, data_, candidates, hp_.class_weights, scratch_);
        if (!split) {
            return index;
        }

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t r : pool) {
            (data_.at(r, split->feature) <= split->threshold ? left : right).push_back(r);
        }
        pool.clear();
        pool.shrink_to_fit();

        nodes_[static_cast<std::size_t>(index)].feature = split->feature;
        nodes_[static_cast<std::size_t>(index)].threshold = split->threshold;
        const auto l = build(std::move(left), depth + 1, child_key(key, false));
        const auto r = build(std::move(right), depth + 1, child_key(key, true));
        nodes_[static_cast<std::size_t>(index)].left = l;
        nodes_[static_cast<std::size_t>(index)].right = r;
        return index;
    }

    std::vector<TreeNode> take() { return std::move(nodes_); }

private:
    const data::Dataset& data_;
    const TreeHyperparams& hp_;
    const FeatureSampler& sampler_;
    double root_mass_;
    std::vector<std::size_t> all_features_;
    std::vector<TreeNode> nodes_;
    std::vector<Entry> scratch_;
};

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

} // namespace

void TreeHyperparams::validate() const
{
    if (max_depth < 1) {
        throw Error(ErrorKind::contract, "max_depth must be at least 1");
    }
    if (min_pool < 1) {
        throw Error(ErrorKind::contract, "min_pool must be at least 1");
    }
    if (!(min_impurity >= 0.0)) {
        throw Error(ErrorKind::contract, "min_impurity must be non-negative");
    }
    if (!(class_weights.positive > 0.0) || !(class_weights.negative > 0.0)) {
        throw Error(ErrorKind::contract, "class weights must be positive");
    }
}

double gini(double w_positive, double w_negative)
{
    const double w = w_positive + w_negative;
    if (!(w > 0.0)) {
        throw Error(ErrorKind::contract, "Gini impurity of an empty pool");
    }
    const double p = w_positive / w;
    const double n = w_negative / w;
    return 1.0 - p * p - n * n;
}

std::optional<Split> best_split(std::span<const std::size_t> pool, const data::Dataset& data,
                                std::span<const std::size_t> candidate_features, const ClassWeights& weights)
{
    for (std::size_t f : candidate_features) {
        if (f >= data.n_features()) {
            throw Error(ErrorKind::contract, "candidate feature " + std::to_string(f) + " out of range");
        }
    }
    std::vector<Entry> scratch;
    return search(pool, data, candidate_features, weights, scratch);
}

std::uint64_t child_key(std::uint64_t parent, bool right) noexcept
{
    // splitmix64 finalizer over the parent key and the branch bit
    std::uint64_t z = parent + (right ? 0xbf58476d1ce4e5b9ULL : 0x94d049bb133111ebULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

TreeModel::TreeModel(std::vector<TreeNode> nodes, std::size_t n_features, std::uint64_t schema_digest,
                     TreeHyperparams hyperparams)
    : nodes_(std::move(nodes)), n_features_(n_features), schema_digest_(schema_digest), hyperparams_(hyperparams)
{
    hyperparams_.validate();
    if (nodes_.empty()) {
        throw Error(ErrorKind::contract, "tree has no nodes");
    }
    const auto count = static_cast<std::int32_t>(nodes_.size());
    std::vector<int> parents(nodes_.size(), 0);
    for (std::int32_t i = 0; i < count; ++i) {
        const auto& n = nodes_[static_cast<std::size_t>(i)];
        if ((n.left < 0) != (n.right < 0)) {
            throw Error(ErrorKind::contract, "node " + std::to_string(i) + " has exactly one child");
        }
        if (n.is_leaf()) {
            continue;
        }
        if (n.left <= i || n.right <= i || n.left >= count || n.right >= count) {
            throw Error(ErrorKind::contract, "node " + std::to_string(i) + " has invalid child indices");
        }
        if (n.feature >= n_features_) {
            throw Error(ErrorKind::dimension, "node " + std::to_string(i) + " splits on feature " +
                                                  std::to_string(n.feature) + " of " + std::to_string(n_features_));
        }
        if (!std::isfinite(n.threshold)) {
            throw Error(ErrorKind::contract, "node " + std::to_string(i) + " has a non-finite threshold");
        }
        for (auto c : {n.left, n.right}) {
            ++parents[static_cast<std::size_t>(c)];
            if (nodes_[static_cast<std::size_t>(c)].depth != n.depth + 1) {
                throw Error(ErrorKind::contract, "node " + std::to_string(c) + " has inconsistent depth");
            }
        }
    }
    if (parents[0] != 0 || nodes_[0].depth != 0 ||
        std::any_of(parents.begin() + 1, parents.end(), [](int p) { return p != 1; })) {
        throw Error(ErrorKind::contract, "tree nodes do not form a single rooted tree");
    }

    importance_.assign(n_features_, 0.0);
    for (const auto& n : nodes_) {
        if (n.is_leaf()) {
            continue;
        }
        const auto& l = nodes_[static_cast<std::size_t>(n.left)];
        const auto& r = nodes_[static_cast<std::size_t>(n.right)];
        const double decrease = n.pool_fraction * n.impurity - l.pool_fraction * l.impurity -
                                r.pool_fraction * r.impurity;
        importance_[n.feature] += std::max(0.0, decrease);
    }
    const double total = std::accumulate(importance_.begin(), importance_.end(), 0.0);
    if (total > 0.0) {
        for (auto& v : importance_) {
            v /= total;
        }
    }
}

std::size_t TreeModel::depth() const noexcept
{
    std::size_t d = 0;
    for (const auto& n : nodes_) {
        d = std::max(d, n.depth);
    }
    return d;
}

const TreeNode& TreeModel::descend(std::span<const double> x, std::size_t depth_limit) const
{
    if (x.size() != n_features_) {
        throw Error(ErrorKind::dimension, "tree expects " + std::to_string(n_features_) + " features, got " +
                                              std::to_string(x.size()));
    }
    const TreeNode* node = &nodes_.front();
    while (!node->is_leaf() && node->depth < depth_limit) {
        const auto next = x[node->feature] <= node->threshold ? node->left : node->right;
        node = &nodes_[static_cast<std::size_t>(next)];
    }
    return *node;
}

double TreeModel::score(std::span<const double> x, std::size_t depth_limit) const
{
    const auto& n = descend(x, depth_limit);
    return (n.weight_positive - n.weight_negative) / (n.weight_positive + n.weight_negative);
}

std::string TreeModel::render(const data::FeatureSchema& schema) const
{
    std::ostringstream out;
    auto class_name = [&](int c) {
        return c > 0 ? schema.class_names().positive : schema.class_names().negative;
    };
    auto visit = [&](auto&& self, std::int32_t index, const std::string& prefix) -> void {
        const auto& n = nodes_[static_cast<std::size_t>(index)];
        const std::string indent(2 * n.depth, ' ');
        const std::string share = format_number(100.0 * n.pool_fraction) + "% of samples";
        if (n.is_leaf()) {
            out << indent << prefix << "leaf: " << class_name(n.dominant_class()) << " (" << share << ")\n";
            return;
        }
        const std::string name = n.feature < schema.size() ? schema.feature(n.feature).name
                                                           : "x" + std::to_string(n.feature);
        out << indent << prefix << name << " <= " << format_number(n.threshold) << " (" << share
            << ", dominant " << class_name(n.dominant_class()) << ")\n";
        self(self, n.left, "yes: ");
        self(self, n.right, "no: ");
    };
    visit(visit, 0, "");
    return out.str();
}

TreeModel fit_tree(const data::Dataset& train, const TreeHyperparams& hp, const FeatureSampler& sampler)
{
    std::vector<std::size_t> rows(train.n_samples());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_tree(train, rows, hp, sampler);
}

TreeModel fit_tree(const data::Dataset& train, std::span<const std::size_t> rows, const TreeHyperparams& hp,
                   const FeatureSampler& sampler, std::uint64_t root_key)
{
    hp.validate();
    for (std::size_t r : rows) {
        if (r >= train.n_samples()) {
            throw Error(ErrorKind::contract, "training row " + std::to_string(r) + " out of range");
        }
    }
    const PoolCounts counts = count_pool(rows, train);
    if (counts.positive == 0 || counts.negative == 0) {
        throw Error(ErrorKind::fit, "decision tree: training data must contain both classes");
    }
    for (double v : train.values()) {
        if (data::is_missing(v)) {
            throw Error(ErrorKind::contract, "decision tree: training data contains missing values");
        }
    }
    const double root_mass = static_cast<double>(counts.positive) * hp.class_weights.positive +
                             static_cast<double>(counts.negative) * hp.class_weights.negative;
    Builder builder(train, hp, sampler, root_mass);
    builder.build(std::vector<std::size_t>(rows.begin(), rows.end()), 0, root_key);
    return TreeModel(builder.take(), train.n_features(), train.schema().digest(), hp);
}

const std::vector<double>& tree_importance(const TreeModel& model) { return model.importance(); }

} // namespace triage::cart

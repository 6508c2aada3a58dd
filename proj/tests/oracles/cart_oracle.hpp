#pragma once

#include "triage/cart/tree.hpp"

#include <vector>

namespace triage::oracle {

// Rows of the training set grouped by the leaf they end in.
using Partition = std::vector<std::vector<std::size_t>>;

// Greedy CART written without the library's split code: at each node every
// feature and every observed value t is tried as "x <= t"; the split with the
// smallest weighted child Gini wins (ties: lowest feature, lowest t) when it
// is below the node's own Gini.
Partition greedy_partition(const data::Dataset& data, const cart::TreeHyperparams& hp);

// Rows routed through a fitted tree.
Partition tree_partition(const cart::TreeModel& model, const data::Dataset& data);

// Sum over leaves of (leaf weight / total weight) * Gini(leaf). Leaves are
// summed in order of their smallest row id.
double training_objective(const Partition& leaves, const data::Dataset& data, const data::ClassWeights& weights);

} // namespace triage::oracle

#pragma once

#include "triage/data/dataset.hpp"
#include "triage/forest/forest.hpp"
#include "triage/store/bundle.hpp"
#include "triage/svm/svm.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace triage::eval {

enum class Family { svm_linear, svm_rbf, tree, forest };

std::string_view to_string(Family f) noexcept;
Family family_from_string(std::string_view s);

// One point of a hyperparameter grid. Only the fields of the family matter.
struct GridPoint {
    double c = 0.0;
    double gamma = 0.0;
    std::size_t max_depth = 0;
    std::size_t n_tree = 0;
    forest::MaxFeatures max_features = forest::MaxFeatures::all;

    bool operator==(const GridPoint&) const = default;
};

// Everything that is not searched: solver settings, tree defaults, RF seed.
struct TrainOptions {
    double svm_tol = 1e-3;
    std::size_t svm_max_passes = 1'000'000;
    std::size_t min_pool = 2;
    double min_impurity = 0.0;
    std::uint64_t seed = 0;
    bool bootstrap = true;
    bool use_class_weights = true;
};

// Validates that the point carries what the family needs.
void validate_point(Family family, const GridPoint& point);

svm::SvmHyperparams svm_hyperparams(Family family, const GridPoint& point, const TrainOptions& options,
                                    const data::ClassWeights& weights);
cart::TreeHyperparams tree_hyperparams(const GridPoint& point, const TrainOptions& options,
                                       const data::ClassWeights& weights);
forest::ForestHyperparams forest_hyperparams(const GridPoint& point, const TrainOptions& options,
                                             const data::ClassWeights& weights);

nlohmann::json point_to_json(Family family, const GridPoint& point);
std::string describe(Family family, const GridPoint& point);

// Fits a classifier on an already preprocessed training set.
using Trainer = std::function<store::Classifier(const data::Dataset& train)>;

// Class weights are derived from the labels of each training set it is given.
Trainer make_trainer(Family family, const GridPoint& point, const TrainOptions& options);

} // namespace triage::eval

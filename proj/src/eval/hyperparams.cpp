#include "triage/eval/hyperparams.hpp"

#include "triage/error.hpp"
#include "triage/eval/metrics.hpp"

#include <cstdio>

namespace triage::eval {

std::string_view to_string(Family f) noexcept
{
    switch (f) {
    case Family::svm_linear: return "svm-linear";
    case Family::svm_rbf: return "svm-rbf";
    case Family::tree: return "tree";
    case Family::forest: return "forest";
    }
    return "unknown";
}

Family family_from_string(std::string_view s)
{
    for (auto f : {Family::svm_linear, Family::svm_rbf, Family::tree, Family::forest}) {
        if (s == to_string(f)) {
            return f;
        }
    }
    throw Error(ErrorKind::usage, "unknown family '" + std::string(s) + "' (svm-linear, svm-rbf, tree, forest)");
}

void validate_point(Family family, const GridPoint& p)
{
    switch (family) {
    case Family::svm_rbf:
        if (!(p.gamma > 0.0)) {
            throw Error(ErrorKind::contract, "svm-rbf needs gamma > 0");
        }
        [[fallthrough]];
    case Family::svm_linear:
        if (!(p.c > 0.0)) {
            throw Error(ErrorKind::contract, "SVM needs C > 0");
        }
        break;
    case Family::forest:
        if (p.n_tree < 1) {
            throw Error(ErrorKind::contract, "forest needs n_tree >= 1");
        }
        [[fallthrough]];
    case Family::tree:
        if (p.max_depth < 1) {
            throw Error(ErrorKind::contract, "trees need max_depth >= 1");
        }
        break;
    }
}

svm::SvmHyperparams svm_hyperparams(Family family, const GridPoint& point, const TrainOptions& options,
                                    const data::ClassWeights& weights)
{
    svm::SvmHyperparams hp;
    hp.C = point.c;
    hp.kernel = family == Family::svm_rbf ? svm::KernelSpec::rbf(point.gamma) : svm::KernelSpec::linear();
    hp.class_weights = weights;
    hp.tol = options.svm_tol;
    hp.max_passes = options.svm_max_passes;
    return hp;
}

cart::TreeHyperparams tree_hyperparams(const GridPoint& point, const TrainOptions& options,
                                       const data::ClassWeights& weights)
{
    cart::TreeHyperparams hp;
    hp.max_depth = point.max_depth;
    hp.min_pool = options.min_pool;
    hp.min_impurity = options.min_impurity;
    hp.class_weights = weights;
    return hp;
}

forest::ForestHyperparams forest_hyperparams(const GridPoint& point, const TrainOptions& options,
                                             const data::ClassWeights& weights)
{
    forest::ForestHyperparams hp;
    hp.n_tree = point.n_tree;
    hp.max_features = point.max_features;
    hp.tree = tree_hyperparams(point, options, weights);
    hp.seed = options.seed;
    hp.bootstrap = options.bootstrap;
    return hp;
}

nlohmann::json point_to_json(Family family, const GridPoint& p)
{
    switch (family) {
    case Family::svm_linear: return {{"C", p.c}};
    case Family::svm_rbf: return {{"C", p.c}, {"gamma", p.gamma}};
    case Family::tree: return {{"max_depth", p.max_depth}};
    case Family::forest:
        return {{"max_depth", p.max_depth}, {"n_tree", p.n_tree}, {"max_features", forest::to_string(p.max_features)}};
    }
    return nlohmann::json::object();
}

std::string describe(Family family, const GridPoint& p)
{
    char buf[160];
    switch (family) {
    case Family::svm_linear: std::snprintf(buf, sizeof(buf), "C=%.6g", p.c); break;
    case Family::svm_rbf: std::snprintf(buf, sizeof(buf), "C=%.6g, gamma=%.6g", p.c, p.gamma); break;
    case Family::tree: std::snprintf(buf, sizeof(buf), "max_d=%zu", p.max_depth); break;
    case Family::forest:
        std::snprintf(buf, sizeof(buf), "max_d=%zu, n_tree=%zu, max_features=%s", p.max_depth, p.n_tree,
                      std::string(forest::to_string(p.max_features)).c_str());
        break;
    }
    return buf;
}

Trainer make_trainer(Family family, const GridPoint& point, const TrainOptions& options)
{
    validate_point(family, point);
    return [family, point, options](const data::Dataset& train) -> store::Classifier {
        const auto weights = options.use_class_weights ? class_weights(train.labels()) : data::ClassWeights{};
        switch (family) {
        case Family::svm_linear:
        case Family::svm_rbf: return svm::fit_svm(train, svm_hyperparams(family, point, options, weights));
        case Family::tree: return cart::fit_tree(train, tree_hyperparams(point, options, weights));
        case Family::forest: return forest::fit_forest(train, forest_hyperparams(point, options, weights));
        }
        throw Error(ErrorKind::contract, "unknown family");
    };
}

} // namespace triage::eval

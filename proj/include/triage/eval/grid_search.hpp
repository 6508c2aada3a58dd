#pragma once

#include "triage/eval/loocv.hpp"
#include "triage/store/bundle.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace triage::eval {

enum class Round { coarse, fine };

std::string_view to_string(Round r) noexcept;

// Candidate lists per hyperparameter; expand() takes their Cartesian product.
struct GridSpec {
    Family family = Family::svm_rbf;
    Round round = Round::coarse;
    std::vector<double> c_values;
    std::vector<double> gamma_values;
    std::vector<std::size_t> max_depths;
    std::vector<std::size_t> n_trees;
    std::vector<forest::MaxFeatures> max_features;
};

// C (and gamma) in {2^-10, ..., 2^10}; trees: max_depth 1..10; forests
// additionally n_tree in {10, 20, 50, 100} and every max_features option.
GridSpec coarse_grid(Family family);

// 20 evenly spaced values over [best/2, 2 best] for C (and gamma). SVM only.
GridSpec fine_grid(Family family, const GridPoint& best);

std::vector<double> linspace(double lo, double hi, std::size_t count);

// Points in lexicographic order: C then gamma for SVMs; n_tree, max_features,
// then max_depth for forests.
std::vector<GridPoint> expand(const GridSpec& spec);

struct TraceRecord {
    Round round = Round::coarse;
    std::size_t index = 0; // position within the round
    Family family = Family::svm_rbf;
    GridPoint point;
    std::uint64_t seed = 0;
    ConfusionCounts counts;
    MetricReport metrics;
};

nlohmann::json to_json(const TraceRecord& r);
void write_trace(const std::filesystem::path& path, const std::vector<TraceRecord>& trace);

// One JSON line per held-out row: {"fold", "truth", "label", "score"}.
void write_folds(const std::filesystem::path& path, const data::Dataset& data, const CvResult& result);

// LOOCV for every point of the spec, sharing work across points: one kernel
// matrix per fold and gamma for SVMs, one deepest forest per fold and
// max_features for trees/forests. Results match loocv() point by point.
std::vector<CvResult> evaluate_grid(const data::Dataset& data, const GridSpec& spec, const TrainOptions& options);

struct SearchOptions {
    TrainOptions train;
    bool fine_round = true; // SVM families only
    std::function<void(const TraceRecord&)> on_record;
};

struct SearchResult {
    Family family = Family::svm_rbf;
    GridPoint best;
    CvResult best_result;
    std::vector<TraceRecord> trace;
    std::size_t coarse_evaluations = 0;
    std::size_t fine_evaluations = 0;
};

// Highest balanced accuracy wins; ties go to the smaller C, then smaller
// gamma, then the lexicographically first point.
bool better(Family family, const MetricReport& a, const GridPoint& pa, const MetricReport& b, const GridPoint& pb);

SearchResult grid_search(const data::Dataset& data, Family family, const SearchOptions& options);

// Per-class means of the observed raw values.
store::ClassMeans class_means(const data::Dataset& data);

// Preprocessing and classifier fitted on all rows, packaged for export.
store::ModelBundle refit(const data::Dataset& data, Family family, const GridPoint& point, const TrainOptions& options,
                         store::BundleMetadata metadata);

} // namespace triage::eval

#pragma once

#include "triage/eval/hyperparams.hpp"
#include "triage/eval/metrics.hpp"

#include <optional>
#include <vector>

namespace triage::eval {

struct CvResult {
    std::vector<store::Prediction> predictions; // one per held-out row, in row order
    ConfusionCounts counts;                     // pooled over all folds
    MetricReport metrics;
    std::optional<GridPoint> hyperparams;
};

// Pools per-fold predictions into counts and metrics.
CvResult summarize(const data::Dataset& data, std::vector<store::Prediction> predictions);

// Throws unless every leave-one-out training set holds both classes.
void require_loocv_folds(const data::Dataset& data);

// Leave-one-out: fold i fits preprocessing and the classifier on every row
// except i, then predicts row i. Folds run in parallel.
CvResult loocv(const data::Dataset& data, const Trainer& trainer);

CvResult loocv(const data::Dataset& data, Family family, const GridPoint& point, const TrainOptions& options);

} // namespace triage::eval

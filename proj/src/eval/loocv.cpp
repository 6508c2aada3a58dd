#include "triage/eval/loocv.hpp"

#include "triage/data/preprocess.hpp"
#include "triage/error.hpp"
#include "triage/util/parallel.hpp"

namespace triage::eval {

CvResult summarize(const data::Dataset& data, std::vector<store::Prediction> predictions)
{
    if (predictions.size() != data.n_samples()) {
        throw Error(ErrorKind::dimension, "one prediction per row expected");
    }
    CvResult r;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        r.counts.add(data.label(i), predictions[i].label);
    }
    r.metrics = compute_metrics(r.counts);
    r.predictions = std::move(predictions);
    return r;
}

void require_loocv_folds(const data::Dataset& data)
{
    if (data.n_samples() < 2) {
        throw Error(ErrorKind::contract, "LOOCV needs at least two rows");
    }
    if (data.count(data::kPositive) < 2 || data.count(data::kNegative) < 2) {
        throw Error(ErrorKind::fit, "LOOCV needs at least two rows per class, otherwise a training fold is single-class");
    }
}

CvResult loocv(const data::Dataset& data, const Trainer& trainer)
{
    require_loocv_folds(data);
    std::vector<store::Prediction> predictions(data.n_samples());
    util::parallel_for(data.n_samples(), [&](std::size_t i) {
        const auto train = data.without_row(i);
        const auto params = data::fit_preprocess(train);
        const auto model = trainer(data::apply_preprocess(params, train));
        predictions[i] = store::predict(model, data::apply_preprocess(params, data.row(i)));
    });
    return summarize(data, std::move(predictions));
}

CvResult loocv(const data::Dataset& data, Family family, const GridPoint& point, const TrainOptions& options)
{
    auto r = loocv(data, make_trainer(family, point, options));
    r.hyperparams = point;
    return r;
}

} // namespace triage::eval

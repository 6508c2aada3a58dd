#include "triage/eval/metrics.hpp"

#include "triage/error.hpp"

#include <algorithm>

namespace triage::eval {

void ConfusionCounts::add(int truth, int predicted) noexcept
{
    if (truth > 0) {
        (predicted > 0 ? tp : fn) += 1;
    } else {
        (predicted > 0 ? fp : tn) += 1;
    }
}

MetricReport compute_metrics(const ConfusionCounts& c)
{
    if (c.positives() == 0 || c.negatives() == 0) {
        throw Error(ErrorKind::contract, "metrics need at least one actual positive and one actual negative");
    }
    MetricReport r;
    r.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.positives());
    r.specificity = static_cast<double>(c.tn) / static_cast<double>(c.negatives());
    r.balanced_accuracy = (r.sensitivity + r.specificity) / 2.0;
    if (c.tp + c.fp > 0) {
        r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    }
    return r;
}

data::ClassWeights class_weights(std::span<const int> labels)
{
    const auto n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), data::kPositive));
    const auto n_neg = static_cast<double>(std::count(labels.begin(), labels.end(), data::kNegative));
    if (n_pos == 0.0 || n_neg == 0.0) {
        throw Error(ErrorKind::contract, "class weights need both classes");
    }
    const double n = static_cast<double>(labels.size());
    return {n / (2.0 * n_pos), n / (2.0 * n_neg)};
}

} // namespace triage::eval

#pragma once

#include "triage/data/dataset.hpp"

#include <optional>
#include <span>

namespace triage::eval {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;

    void add(int truth, int predicted) noexcept;
    [[nodiscard]] std::size_t positives() const noexcept { return tp + fn; }
    [[nodiscard]] std::size_t negatives() const noexcept { return tn + fp; }
    bool operator==(const ConfusionCounts&) const = default;
};

struct MetricReport {
    double balanced_accuracy = 0.0; // (sensitivity + specificity) / 2
    double sensitivity = 0.0;
    double specificity = 0.0;
    std::optional<double> precision; // empty when nothing was predicted positive
    bool operator==(const MetricReport&) const = default;
};

// Requires at least one actual positive and one actual negative.
MetricReport compute_metrics(const ConfusionCounts& c);

// weight(c) = N / (2 N_c): inversely proportional to class size, 1 on balanced data.
data::ClassWeights class_weights(std::span<const int> labels);

} // namespace triage::eval

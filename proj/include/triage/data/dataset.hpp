#pragma once

#include "triage/data/schema.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace triage::data {

inline constexpr int kPositive = 1;
inline constexpr int kNegative = -1;

// Per-class multiplicative sample weights (+1 -> positive, -1 -> negative).
struct ClassWeights {
    double positive = 1.0;
    double negative = 1.0;

    [[nodiscard]] double of(int label) const noexcept { return label > 0 ? positive : negative; }
    bool operator==(const ClassWeights&) const = default;
};

// Missing-value sentinel. A quiet NaN cannot collide with a measurement.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

[[nodiscard]] inline bool is_missing(double v) noexcept { return std::isnan(v); }

// N x d matrix (row-major) of measurements with missing markers, plus one
// +1/-1 label per row.
class Dataset {
public:
    Dataset() = default;
    Dataset(FeatureSchema schema, std::vector<double> values, std::vector<int> labels);

    [[nodiscard]] std::size_t n_samples() const noexcept { return labels_.size(); }
    [[nodiscard]] std::size_t n_features() const noexcept { return schema_.size(); }
    [[nodiscard]] const FeatureSchema& schema() const noexcept { return schema_; }
    [[nodiscard]] const ClassNames& class_names() const noexcept { return schema_.class_names(); }

    [[nodiscard]] std::span<const double> row(std::size_t i) const
    {
        return {values_.data() + i * n_features(), n_features()};
    }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values_[i * n_features() + j]; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    [[nodiscard]] const std::vector<int>& labels() const noexcept { return labels_; }
    [[nodiscard]] int label(std::size_t i) const { return labels_[i]; }

    [[nodiscard]] std::size_t count(int label) const noexcept;
    [[nodiscard]] bool has_both_classes() const noexcept
    {
        return count(kPositive) > 0 && count(kNegative) > 0;
    }
    [[nodiscard]] std::size_t missing_count() const noexcept;

    [[nodiscard]] Dataset select_rows(std::span<const std::size_t> rows) const;
    [[nodiscard]] Dataset select_features(std::span<const std::size_t> ids) const;
    [[nodiscard]] Dataset without_row(std::size_t i) const;

    bool operator==(const Dataset& other) const noexcept;

private:
    FeatureSchema schema_;
    std::vector<double> values_;
    std::vector<int> labels_;
};

// Throws Error(fit) unless both labels occur.
void require_both_classes(const Dataset& data, const char* what);

} // namespace triage::data

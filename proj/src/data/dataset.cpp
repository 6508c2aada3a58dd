#include "triage/data/dataset.hpp"

#include "triage/error.hpp"

#include <algorithm>
#include <cstring>

namespace triage::data {

Dataset::Dataset(FeatureSchema schema, std::vector<double> values, std::vector<int> labels)
    : schema_(std::move(schema)), values_(std::move(values)), labels_(std::move(labels))
{
    if (values_.size() != labels_.size() * schema_.size()) {
        throw Error(ErrorKind::dimension, "dataset has " + std::to_string(values_.size()) +
                                              " values for " + std::to_string(labels_.size()) +
                                              " rows of " + std::to_string(schema_.size()) + " features");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] != kPositive && labels_[i] != kNegative) {
            throw Error(ErrorKind::contract, "label of row " + std::to_string(i) + " is " +
                                                 std::to_string(labels_[i]) + ", expected +1 or -1");
        }
    }
}

std::size_t Dataset::count(int label) const noexcept
{
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

std::size_t Dataset::missing_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), is_missing));
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const
{
    const std::size_t d = n_features();
    std::vector<double> values;
    values.reserve(rows.size() * d);
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (std::size_t r : rows) {
        const auto x = row(r);
        values.insert(values.end(), x.begin(), x.end());
        labels.push_back(labels_.at(r));
    }
    return Dataset(schema_, std::move(values), std::move(labels));
}

Dataset Dataset::select_features(std::span<const std::size_t> ids) const
{
    std::vector<double> values;
    values.reserve(n_samples() * ids.size());
    for (std::size_t i = 0; i < n_samples(); ++i) {
        for (std::size_t j : ids) {
            values.push_back(at(i, j));
        }
    }
    return Dataset(schema_.subset(ids), std::move(values), labels_);
}

Dataset Dataset::without_row(std::size_t i) const
{
    const std::size_t d = n_features();
    std::vector<double> values(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(i * d));
    values.insert(values.end(), values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * d), values_.end());
    std::vector<int> labels(labels_.begin(), labels_.begin() + static_cast<std::ptrdiff_t>(i));
    labels.insert(labels.end(), labels_.begin() + static_cast<std::ptrdiff_t>(i + 1), labels_.end());
    return Dataset(schema_, std::move(values), std::move(labels));
}

bool Dataset::operator==(const Dataset& other) const noexcept
{
    // bitwise on values so that missing markers compare equal
    return schema_ == other.schema_ && labels_ == other.labels_ && values_.size() == other.values_.size() &&
           std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(double)) == 0;
}

void require_both_classes(const Dataset& data, const char* what)
{
    if (!data.has_both_classes()) {
        throw Error(ErrorKind::fit, std::string(what) + ": training data must contain both classes (got " +
                                        std::to_string(data.count(kPositive)) + " positive, " +
                                        std::to_string(data.count(kNegative)) + " negative)");
    }
}

} // namespace triage::data

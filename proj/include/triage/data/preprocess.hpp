#pragma once

#include "triage/data/dataset.hpp"

#include <span>
#include <vector>

namespace triage::data {

// Mean imputation followed by z-scoring. Scales use the population standard
// deviation of the imputed training column; a constant column gets scale 1.
struct PreprocessParams {
    std::vector<double> impute_means;
    std::vector<double> standardize_means;
    std::vector<double> standardize_scales;

    [[nodiscard]] std::size_t size() const noexcept { return impute_means.size(); }
    bool operator==(const PreprocessParams&) const = default;
};

PreprocessParams fit_preprocess(const Dataset& train);

Dataset apply_preprocess(const PreprocessParams& params, const Dataset& data);

// Single-vector form used at prediction time.
std::vector<double> apply_preprocess(const PreprocessParams& params, std::span<const double> x);

} // namespace triage::data

#include "triage/data/preprocess.hpp"

#include "triage/error.hpp"

#include <algorithm>
#include <cmath>

namespace triage::data {

PreprocessParams fit_preprocess(const Dataset& train)
{
    const std::size_t n = train.n_samples();
    const std::size_t d = train.n_features();
    if (n == 0) {
        throw Error(ErrorKind::empty_dataset, "cannot fit preprocessing on an empty dataset");
    }

    PreprocessParams p;
    p.impute_means.resize(d);
    p.standardize_means.resize(d);
    p.standardize_scales.resize(d);

    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        std::size_t observed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = train.at(i, j);
            if (!is_missing(v)) {
                sum += v;
                ++observed;
            }
        }
        if (observed == 0) {
            throw Error(ErrorKind::fit, "feature '" + train.schema().feature(j).name +
                                            "' has no observed training values");
        }
        const double impute = sum / static_cast<double>(observed);

        // Imputed entries equal the observed mean, so the column mean is unchanged;
        // recompute anyway to keep the two steps independent.
        double col_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = train.at(i, j);
            col_sum += is_missing(v) ? impute : v;
        }
        const double mean = col_sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = train.at(i, j);
            const double dev = (is_missing(v) ? impute : v) - mean;
            ss += dev * dev;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));

        p.impute_means[j] = impute;
        p.standardize_means[j] = mean;
        // relative guard: a column whose spread is pure rounding noise is constant
        p.standardize_scales[j] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
    }
    return p;
}

namespace {

void check_dims(const PreprocessParams& params, std::size_t d)
{
    if (params.impute_means.size() != d || params.standardize_means.size() != d ||
        params.standardize_scales.size() != d) {
        throw Error(ErrorKind::dimension, "preprocessing parameters have dimension " +
                                              std::to_string(params.impute_means.size()) + ", data has " +
                                              std::to_string(d));
    }
}

} // namespace

std::vector<double> apply_preprocess(const PreprocessParams& params, std::span<const double> x)
{
    check_dims(params, x.size());
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double v = is_missing(x[j]) ? params.impute_means[j] : x[j];
        out[j] = (v - params.standardize_means[j]) / params.standardize_scales[j];
    }
    return out;
}

Dataset apply_preprocess(const PreprocessParams& params, const Dataset& data)
{
    check_dims(params, data.n_features());
    std::vector<double> values;
    values.reserve(data.values().size());
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        const auto row = apply_preprocess(params, data.row(i));
        values.insert(values.end(), row.begin(), row.end());
    }
    return Dataset(data.schema(), std::move(values), data.labels());
}

} // namespace triage::data

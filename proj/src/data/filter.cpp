#include "triage/data/filter.hpp"

#include "triage/error.hpp"

#include <map>

namespace triage::data {

Dataset apply_hscrp_rule(const Dataset& raw, std::size_t crp_id, std::optional<std::span<const double>> hscrp)
{
    if (crp_id >= raw.n_features()) {
        throw Error(ErrorKind::contract, "CRP feature id " + std::to_string(crp_id) + " out of range for " +
                                             std::to_string(raw.n_features()) + " features");
    }
    if (!hscrp) {
        return raw;
    }
    if (hscrp->size() != raw.n_samples()) {
        throw Error(ErrorKind::dimension, "hsCRP column has " + std::to_string(hscrp->size()) +
                                              " entries for " + std::to_string(raw.n_samples()) + " rows");
    }
    std::vector<double> values = raw.values();
    const std::size_t d = raw.n_features();
    for (std::size_t i = 0; i < raw.n_samples(); ++i) {
        if (!is_missing((*hscrp)[i])) {
            values[i * d + crp_id] = (*hscrp)[i];
        }
    }
    return Dataset(raw.schema(), std::move(values), raw.labels());
}

FilterResult filter_features(const Dataset& data, std::span<const std::string> groups)
{
    if (groups.size() != data.n_samples()) {
        throw Error(ErrorKind::contract, "got " + std::to_string(groups.size()) + " group tags for " +
                                             std::to_string(data.n_samples()) + " rows");
    }
    const std::size_t d = data.n_features();

    struct Tally {
        std::size_t rows = 0;
        std::vector<std::size_t> missing;
    };
    std::map<std::string, Tally> tallies;
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        auto& t = tallies[groups[i]];
        t.missing.resize(d, 0);
        ++t.rows;
        const auto x = data.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            t.missing[j] += is_missing(x[j]) ? 1 : 0;
        }
    }

    FilterResult result;
    for (std::size_t j = 0; j < d; ++j) {
        bool drop = false;
        for (const auto& [group, t] : tallies) {
            // missing on half or more of the group
            if (2 * t.missing[j] >= t.rows) {
                drop = true;
                break;
            }
        }
        (drop ? result.dropped : result.kept).push_back(j);
    }
    if (result.kept.empty()) {
        throw Error(ErrorKind::schema, "feature filtering dropped every feature");
    }
    result.data = data.select_features(result.kept);
    return result;
}

FilterResult filter_subjects(const Dataset& data)
{
    const std::size_t d = data.n_features();
    if (d == 0) {
        throw Error(ErrorKind::contract, "subject filtering needs at least one feature");
    }
    FilterResult result;
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        std::size_t missing = 0;
        for (double v : data.row(i)) {
            missing += is_missing(v) ? 1 : 0;
        }
        // missing / d > 0.2, kept in integers
        (5 * missing > d ? result.dropped : result.kept).push_back(i);
    }
    if (result.kept.empty()) {
        throw Error(ErrorKind::empty_dataset, "subject filtering dropped every row");
    }
    result.data = data.select_rows(result.kept);
    return result;
}

} // namespace triage::data

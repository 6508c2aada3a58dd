#pragma once

#include "triage/data/dataset.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace triage::data {

struct FilterResult {
    Dataset data;
    std::vector<std::size_t> kept;     // surviving ids (features or rows) in the input numbering
    std::vector<std::size_t> dropped;
};

// Wherever hscrp[i] is observed it replaces the CRP slot of row i.
Dataset apply_hscrp_rule(const Dataset& raw, std::size_t crp_id,
                         std::optional<std::span<const double>> hscrp);

// Drops a feature when, in at least one group, it is missing on at least half
// of that group's rows. The schema is renumbered.
FilterResult filter_features(const Dataset& data, std::span<const std::string> groups);

// Drops a row when more than 20% of its features are missing.
FilterResult filter_subjects(const Dataset& data);

} // namespace triage::data

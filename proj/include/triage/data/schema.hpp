#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace triage::data {

struct Feature {
    std::size_t id = 0;
    std::string name;
    std::string unit;

    bool operator==(const Feature&) const = default;
};

// Display names for the two labels. +1 is always the positive class.
struct ClassNames {
    std::string positive = "positive";
    std::string negative = "negative";

    bool operator==(const ClassNames&) const = default;
};

// Ordered feature descriptors. Slot i of every feature vector holds feature
// id i; ids are dense and names unique.
class FeatureSchema {
public:
    FeatureSchema() = default;
    FeatureSchema(std::vector<Feature> features, bool has_age_gender = false,
                  ClassNames class_names = {},
                  std::map<std::string, std::string> metadata = {});

    [[nodiscard]] std::size_t size() const noexcept { return features_.size(); }
    [[nodiscard]] bool empty() const noexcept { return features_.empty(); }
    [[nodiscard]] const std::vector<Feature>& features() const noexcept { return features_; }
    [[nodiscard]] const Feature& feature(std::size_t id) const { return features_.at(id); }
    [[nodiscard]] bool has_age_gender() const noexcept { return has_age_gender_; }
    [[nodiscard]] const ClassNames& class_names() const noexcept { return class_names_; }

    // Free-form annotations, e.g. "gender_encoding" -> "0=female,1=male".
    [[nodiscard]] const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }

    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;

    // Keeps the listed ids (ascending) and renumbers them 0..k-1.
    [[nodiscard]] FeatureSchema subset(std::span<const std::size_t> kept_ids) const;

    // FNV-1a over names and units; identifies the slot layout a model was fitted on.
    [[nodiscard]] std::uint64_t digest() const noexcept;

    bool operator==(const FeatureSchema&) const = default;

private:
    std::vector<Feature> features_;
    bool has_age_gender_ = false;
    ClassNames class_names_;
    std::map<std::string, std::string> metadata_;
};

// The 13 routine blood tests shared by all cohorts, optionally followed by
// age (years) and gender (0 = female, 1 = male).
FeatureSchema blood_panel_schema(bool with_age_gender);

} // namespace triage::data

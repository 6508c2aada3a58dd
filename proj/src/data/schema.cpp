#include "triage/data/schema.hpp"

#include "triage/error.hpp"

#include <set>

namespace triage::data {

FeatureSchema::FeatureSchema(std::vector<Feature> features, bool has_age_gender, ClassNames class_names,
                             std::map<std::string, std::string> metadata)
    : features_(std::move(features))
    , has_age_gender_(has_age_gender)
    , class_names_(std::move(class_names))
    , metadata_(std::move(metadata))
{
    std::set<std::string_view> names;
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].id != i) {
            throw Error(ErrorKind::schema, "feature '" + features_[i].name + "' has id " +
                                               std::to_string(features_[i].id) + ", expected " +
                                               std::to_string(i));
        }
        if (features_[i].name.empty()) {
            throw Error(ErrorKind::schema, "feature " + std::to_string(i) + " has an empty name");
        }
        if (!names.insert(features_[i].name).second) {
            throw Error(ErrorKind::schema, "duplicate feature name '" + features_[i].name + "'");
        }
    }
    if (class_names_.positive == class_names_.negative) {
        throw Error(ErrorKind::schema, "class names must differ");
    }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const
{
    for (const auto& f : features_) {
        if (f.name == name) {
            return f.id;
        }
    }
    return std::nullopt;
}

FeatureSchema FeatureSchema::subset(std::span<const std::size_t> kept_ids) const
{
    std::vector<Feature> kept;
    kept.reserve(kept_ids.size());
    for (std::size_t id : kept_ids) {
        Feature f = features_.at(id);
        f.id = kept.size();
        kept.push_back(std::move(f));
    }
    return FeatureSchema(std::move(kept), has_age_gender_, class_names_, metadata_);
}

std::uint64_t FeatureSchema::digest() const noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0x1f; // field separator
        h *= 0x100000001b3ULL;
    };
    for (const auto& f : features_) {
        mix(f.name);
        mix(f.unit);
    }
    return h;
}

FeatureSchema blood_panel_schema(bool with_age_gender)
{
    std::vector<Feature> fs = {
        {0, "WBC", "10^9/L"},
        {1, "HGB", "g/L"},
        {2, "platelet", "10^9/L"},
        {3, "neutrophil_pct", "%"},
        {4, "neutrophil_count", "10^9/L"},
        {5, "lymphocyte_pct", "%"},
        {6, "lymphocyte_count", "10^9/L"},
        {7, "CRP", "mg/L"},
        {8, "TBil", "umol/L"},
        {9, "BUN", "mmol/L"},
        {10, "creatinine", "umol/L"},
        {11, "LDH", "U/L"},
        {12, "D-dimer", "mg/L"},
    };
    std::map<std::string, std::string> meta;
    if (with_age_gender) {
        fs.push_back({13, "age", "years"});
        fs.push_back({14, "gender", "0=female,1=male"});
        meta["gender_encoding"] = "0=female,1=male";
    }
    return FeatureSchema(std::move(fs), with_age_gender, ClassNames{"COVID-19", "non-COVID-19 viral"},
                         std::move(meta));
}

} // namespace triage::data

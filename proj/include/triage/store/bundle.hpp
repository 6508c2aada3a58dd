#pragma once

#include "triage/cart/tree.hpp"
#include "triage/data/preprocess.hpp"
#include "triage/data/schema.hpp"
#include "triage/forest/forest.hpp"
#include "triage/svm/svm.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

namespace triage::store {

using Classifier = std::variant<svm::SvmModel, cart::TreeModel, forest::ForestModel>;

struct Prediction {
    int label = data::kPositive;
    double score = 0.0; // SVM decision value, tree leaf margin or forest vote margin
};

// Expects a preprocessed (imputed, standardized) vector.
Prediction predict(const Classifier& classifier, std::span<const double> x);
std::size_t input_dimension(const Classifier& classifier);
std::string_view classifier_tag(const Classifier& classifier);

// Normalized importance for linear SVMs and single trees; other models throw
// Error(unsupported).
std::vector<double> feature_importance(const Classifier& classifier);

// Raw (unstandardized) per-class means of the observed training values.
struct ClassMeans {
    std::vector<double> positive;
    std::vector<double> negative;
    bool operator==(const ClassMeans&) const = default;
};

struct BundleMetadata {
    std::string task;
    std::string trained_at;
    nlohmann::json hyperparams = nlohmann::json::object();
    std::uint64_t seed = 0;
    bool operator==(const BundleMetadata&) const = default;
};

inline constexpr int kFormatVersion = 1;

// The unit of export: everything needed to go from raw measurements to a label.
struct ModelBundle {
    int format_version = kFormatVersion;
    data::FeatureSchema schema;
    data::PreprocessParams preprocess;
    Classifier classifier;
    BundleMetadata metadata;
    std::optional<ClassMeans> class_means;

    // Schema, preprocessing and classifier dimensions agree.
    void validate() const;

    // Raw measurements in schema order; missing entries are imputed.
    [[nodiscard]] Prediction predict(std::span<const double> raw) const;
};

// Canonical JSON: sorted keys, shortest round-trip numbers, no whitespace.
std::string encode_bundle(const ModelBundle& bundle);

// Throws Error with kind bundle_parse, bundle_version, bundle_format or
// bundle_dimension.
ModelBundle decode_bundle(std::string_view bytes);

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

} // namespace triage::store

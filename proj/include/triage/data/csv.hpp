#pragma once

#include "triage/data/dataset.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace triage::data {

// Schema sidecar:
//   {"features": [{"name": "CRP", "unit": "mg/L"}, ...],
//    "has_age_gender": false,
//    "class_names": {"positive": "moderate", "negative": "viral"},
//    "metadata": {...}}
// Feature ids are optional; when given they must equal the list position.
FeatureSchema schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const FeatureSchema& schema);
FeatureSchema load_schema(const std::filesystem::path& path);

// Reads a UTF-8 CSV with a header row. Every schema feature and the label
// column must be present; other columns are ignored. Empty cells become
// kMissing, label strings map through the schema's class names.
Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                 const std::string& label_column);

// Raw numeric column (empty cells -> kMissing), e.g. an hsCRP measurement.
std::vector<double> read_numeric_column(const std::filesystem::path& path, const std::string& column);

// Raw text column, e.g. a cohort/group tag.
std::vector<std::string> read_text_column(const std::filesystem::path& path, const std::string& column);

// Writes features in schema order then the label column; missing -> empty cell.
// Numbers use the shortest round-trip representation.
void write_csv(const std::filesystem::path& path, const Dataset& data, const std::string& label_column);

} // namespace triage::data

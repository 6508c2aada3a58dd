#include "triage/data/csv.hpp"

#include "triage/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace triage::data {

namespace {

using Row = std::vector<std::string>;

// Minimal RFC 4180 reader: commas, double-quoted fields, "" escapes, CRLF.
std::vector<Row> read_rows(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    if (text.starts_with("\xEF\xBB\xBF")) {
        text.erase(0, 3);
    }

    std::vector<Row> rows;
    Row row;
    std::string cell;
    bool quoted = false;
    bool row_has_content = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            quoted = true;
            row_has_content = true;
            break;
        case ',':
            row.push_back(std::move(cell));
            cell.clear();
            row_has_content = true;
            break;
        case '\r':
            break;
        case '\n':
            if (row_has_content || !cell.empty()) {
                row.push_back(std::move(cell));
                rows.push_back(std::move(row));
            }
            row.clear();
            cell.clear();
            row_has_content = false;
            break;
        default:
            cell.push_back(c);
            row_has_content = true;
        }
    }
    if (quoted) {
        throw Error(ErrorKind::ingestion, path.string() + ": unterminated quoted field");
    }
    if (row_has_content || !cell.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw Error(ErrorKind::ingestion, path.string() + ": missing header row");
    }
    return rows;
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::string location(const std::filesystem::path& path, std::size_t line, const std::string& column)
{
    return path.string() + ":" + std::to_string(line) + " column '" + column + "'";
}

double parse_cell(std::string_view raw, const std::filesystem::path& path, std::size_t line,
                  const std::string& column)
{
    const auto s = trim(raw);
    if (s.empty()) {
        return kMissing;
    }
    double v = 0.0;
    const char* begin = s.data();
    if (*begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw Error(ErrorKind::ingestion,
                    location(path, line, column) + ": non-numeric value '" + std::string(s) + "'");
    }
    return v;
}

std::size_t column_index(const Row& header, const std::string& name, const std::filesystem::path& path)
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == name) {
            return i;
        }
    }
    throw Error(ErrorKind::ingestion, path.string() + ": header has no column '" + name + "'");
}

void check_width(const Row& row, std::size_t width, const std::filesystem::path& path, std::size_t line)
{
    if (row.size() != width) {
        throw Error(ErrorKind::ingestion, path.string() + ":" + std::to_string(line) + ": expected " +
                                              std::to_string(width) + " columns, found " +
                                              std::to_string(row.size()));
    }
}

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

FeatureSchema schema_from_json(const nlohmann::json& j)
{
    try {
        std::vector<Feature> features;
        for (const auto& f : j.at("features")) {
            Feature feature;
            feature.id = f.contains("id") ? f.at("id").get<std::size_t>() : features.size();
            feature.name = f.at("name").get<std::string>();
            feature.unit = f.value("unit", std::string{});
            features.push_back(std::move(feature));
        }
        ClassNames names;
        if (j.contains("class_names")) {
            names.positive = j.at("class_names").at("positive").get<std::string>();
            names.negative = j.at("class_names").at("negative").get<std::string>();
        }
        auto metadata = j.value("metadata", std::map<std::string, std::string>{});
        return FeatureSchema(std::move(features), j.value("has_age_gender", false), std::move(names),
                             std::move(metadata));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::schema, std::string("invalid schema JSON: ") + e.what());
    }
}

nlohmann::json schema_to_json(const FeatureSchema& schema)
{
    nlohmann::json features = nlohmann::json::array();
    for (const auto& f : schema.features()) {
        features.push_back({{"id", f.id}, {"name", f.name}, {"unit", f.unit}});
    }
    return {
        {"features", std::move(features)},
        {"has_age_gender", schema.has_age_gender()},
        {"class_names", {{"positive", schema.class_names().positive}, {"negative", schema.class_names().negative}}},
        {"metadata", schema.metadata()},
    };
}

FeatureSchema load_schema(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::schema, path.string() + ": " + e.what());
    }
    return schema_from_json(j);
}

Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema, const std::string& label_column)
{
    const auto rows = read_rows(path);
    const Row& header = rows.front();

    std::vector<std::size_t> feature_columns;
    feature_columns.reserve(schema.size());
    for (const auto& f : schema.features()) {
        feature_columns.push_back(column_index(header, f.name, path));
    }
    const std::size_t label_col = column_index(header, label_column, path);

    std::vector<double> values;
    values.reserve((rows.size() - 1) * schema.size());
    std::vector<int> labels;
    labels.reserve(rows.size() - 1);
    const auto& names = schema.class_names();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const std::size_t line = r + 1;
        check_width(rows[r], header.size(), path, line);
        for (std::size_t j = 0; j < schema.size(); ++j) {
            values.push_back(parse_cell(rows[r][feature_columns[j]], path, line, schema.feature(j).name));
        }
        const auto label = trim(rows[r][label_col]);
        if (label == names.positive) {
            labels.push_back(kPositive);
        } else if (label == names.negative) {
            labels.push_back(kNegative);
        } else {
            throw Error(ErrorKind::ingestion, location(path, line, label_column) + ": unknown label '" +
                                                  std::string(label) + "'");
        }
    }
    return Dataset(schema, std::move(values), std::move(labels));
}

std::vector<double> read_numeric_column(const std::filesystem::path& path, const std::string& column)
{
    const auto rows = read_rows(path);
    const std::size_t col = column_index(rows.front(), column, path);
    std::vector<double> out;
    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        check_width(rows[r], rows.front().size(), path, r + 1);
        out.push_back(parse_cell(rows[r][col], path, r + 1, column));
    }
    return out;
}

std::vector<std::string> read_text_column(const std::filesystem::path& path, const std::string& column)
{
    const auto rows = read_rows(path);
    const std::size_t col = column_index(rows.front(), column, path);
    std::vector<std::string> out;
    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        check_width(rows[r], rows.front().size(), path, r + 1);
        out.emplace_back(trim(rows[r][col]));
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& data, const std::string& label_column)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    }
    for (const auto& f : data.schema().features()) {
        out << quote_if_needed(f.name) << ',';
    }
    out << quote_if_needed(label_column) << '\n';
    const auto& names = data.class_names();
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        for (double v : data.row(i)) {
            if (!is_missing(v)) {
                out << format_double(v);
            }
            out << ',';
        }
        out << quote_if_needed(data.label(i) == kPositive ? names.positive : names.negative) << '\n';
    }
    if (!out) {
        throw Error(ErrorKind::io, "failed writing '" + path.string() + "'");
    }
}

} // namespace triage::data

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace triage {

// Error categories surface on the CLI as `error[<category>]: <message>`.
enum class ErrorKind {
    ingestion,      // CSV / schema file problems
    schema,         // schema invariants, empty schema after filtering
    empty_dataset,
    contract,       // violated preconditions
    dimension,      // vector / matrix size mismatch
    fit,            // training cannot proceed (single class, degenerate bootstrap)
    unsupported,    // operation not defined for this model kind
    bundle_parse,   // malformed bundle JSON
    bundle_version, // unknown format_version
    bundle_dimension,
    bundle_format,  // structurally invalid bundle (unknown tag, missing field)
    io,
    usage,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace triage

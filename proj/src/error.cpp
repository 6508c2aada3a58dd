#include "triage/error.hpp"

namespace triage {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::ingestion: return "ingestion";
    case ErrorKind::schema: return "schema";
    case ErrorKind::empty_dataset: return "empty-dataset";
    case ErrorKind::contract: return "contract";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::fit: return "fit";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::bundle_parse: return "bundle-parse";
    case ErrorKind::bundle_version: return "bundle-version";
    case ErrorKind::bundle_dimension: return "bundle-dimension";
    case ErrorKind::bundle_format: return "bundle-format";
    case ErrorKind::io: return "io";
    case ErrorKind::usage: return "usage";
    }
    return "unknown";
}

} // namespace triage

#include "uotkit/error.hpp"

namespace uotkit {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_measure: return "invalid-measure";
    case ErrorCode::empty_measure: return "empty-measure";
    case ErrorCode::non_finite: return "non-finite";
    case ErrorCode::degenerate_feature: return "degenerate-feature";
    case ErrorCode::mass_mismatch: return "mass-mismatch";
    case ErrorCode::instance_too_large: return "instance-too-large";
    case ErrorCode::singular_stains: return "singular-stains";
    case ErrorCode::undefined_correlation: return "undefined-correlation";
    case ErrorCode::numerical_failure: return "numerical-failure";
    case ErrorCode::format_error: return "format-error";
    case ErrorCode::corrupt_file: return "corrupt-file";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::io_error: return "io-error";
    }
    return "unknown";
}

bool is_numerical(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::non_finite:
    case ErrorCode::singular_stains:
    case ErrorCode::undefined_correlation:
    case ErrorCode::numerical_failure:
        return true;
    default:
        return false;
    }
}

} // namespace uotkit

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uotkit {

enum class ErrorCode {
    invalid_argument,
    invalid_measure,
    empty_measure,
    non_finite,
    degenerate_feature,
    mass_mismatch,
    instance_too_large,
    singular_stains,
    undefined_correlation,
    numerical_failure,
    format_error,
    corrupt_file,
    parse_error,
    io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

// Numerical failures (as opposed to bad input data) map to a distinct CLI exit code.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

} // namespace uotkit

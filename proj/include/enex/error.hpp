#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace enex {

enum class ErrorCode {
    io,
    unsupported_format,
    malformed_header,
    malformed_payload,
    dimension_overflow,
    degenerate_image,
    feature_unavailable,
    precondition,
    dimension_mismatch,
    degenerate_problem,
    non_finite,
    invalid_argument,
    rank_out_of_range,
    no_usable_feature,
    empty_gallery,
    duplicate_label,
    unknown_label,
    cannot_fit,
    not_fitted,
    bad_magic,
    version_mismatch,
    checksum,
    truncated,
    malformed_row,
    missing_file,
    closed_set_violation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a code so callers (and the CLI
/// exit-status mapping) can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace enex

#include "enex/error.hpp"

namespace enex {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::io: return "io error";
        case ErrorCode::unsupported_format: return "unsupported format";
        case ErrorCode::malformed_header: return "malformed header";
        case ErrorCode::malformed_payload: return "malformed payload";
        case ErrorCode::dimension_overflow: return "dimension overflow";
        case ErrorCode::degenerate_image: return "degenerate image";
        case ErrorCode::feature_unavailable: return "feature unavailable";
        case ErrorCode::precondition: return "precondition violated";
        case ErrorCode::dimension_mismatch: return "dimension mismatch";
        case ErrorCode::degenerate_problem: return "degenerate problem";
        case ErrorCode::non_finite: return "non-finite input";
        case ErrorCode::invalid_argument: return "invalid argument";
        case ErrorCode::rank_out_of_range: return "rank out of range";
        case ErrorCode::no_usable_feature: return "no usable feature";
        case ErrorCode::empty_gallery: return "empty gallery";
        case ErrorCode::duplicate_label: return "duplicate label";
        case ErrorCode::unknown_label: return "unknown label";
        case ErrorCode::cannot_fit: return "cannot fit";
        case ErrorCode::not_fitted: return "gallery not fitted";
        case ErrorCode::bad_magic: return "bad magic";
        case ErrorCode::version_mismatch: return "version mismatch";
        case ErrorCode::checksum: return "checksum failure";
        case ErrorCode::truncated: return "truncated snapshot";
        case ErrorCode::malformed_row: return "malformed row";
        case ErrorCode::missing_file: return "missing file";
        case ErrorCode::closed_set_violation: return "closed-set violation";
    }
    return "unknown error";
}

}  // namespace enex

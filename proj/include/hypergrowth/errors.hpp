#pragma once

#include <stdexcept>
#include <string>

namespace hypergrowth {

/// Failure categories surfaced by the library. The CLI maps these onto its
/// exit-code contract: data errors -> 2, numerical/fit errors -> 3,
/// configuration errors -> 4.
enum class ErrorKind {
    domain_error,             // evaluation at/beyond a singularity
    insufficient_data,
    not_growth_like,          // fitted reciprocal slope implies decay
    mismatched_regions,
    no_common_years,
    year_unavailable,
    quorum,                   // fewer reporting regions than the operation needs
    unknown_region,
    out_of_span,
    single_segment,
    bad_grid,
    no_valid_lag,
    parse_error,
    duplicate_year,
    duplicate_series,
    non_positive_value,
    unit_mismatch,
    schema_version_mismatch,
    corrupt_file,
    io_error,
    invalid_argument,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::domain_error: return "domain_error";
        case ErrorKind::insufficient_data: return "insufficient_data";
        case ErrorKind::not_growth_like: return "not_growth_like";
        case ErrorKind::mismatched_regions: return "mismatched_regions";
        case ErrorKind::no_common_years: return "no_common_years";
        case ErrorKind::year_unavailable: return "year_unavailable";
        case ErrorKind::quorum: return "quorum";
        case ErrorKind::unknown_region: return "unknown_region";
        case ErrorKind::out_of_span: return "out_of_span";
        case ErrorKind::single_segment: return "single_segment";
        case ErrorKind::bad_grid: return "bad_grid";
        case ErrorKind::no_valid_lag: return "no_valid_lag";
        case ErrorKind::parse_error: return "parse_error";
        case ErrorKind::duplicate_year: return "duplicate_year";
        case ErrorKind::duplicate_series: return "duplicate_series";
        case ErrorKind::non_positive_value: return "non_positive_value";
        case ErrorKind::unit_mismatch: return "unit_mismatch";
        case ErrorKind::schema_version_mismatch: return "schema_version_mismatch";
        case ErrorKind::corrupt_file: return "corrupt_file";
        case ErrorKind::io_error: return "io_error";
        case ErrorKind::invalid_argument: return "invalid_argument";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace hypergrowth

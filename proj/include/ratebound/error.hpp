#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ratebound {

enum class ErrorCode {
    InvalidParams,
    InvalidInputs,
    DegenerateMajority,
    InvalidDelta,
    InvalidFraction,
    InvalidEpsilon,
    BelowThreshold,
    AboveThreshold,
    SameAsTruth,
    EmptyInput,
    ParseError,
    OutOfScaleRating,
};

constexpr std::string_view error_name(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidInputs: return "InvalidInputs";
    case ErrorCode::DegenerateMajority: return "DegenerateMajority";
    case ErrorCode::InvalidDelta: return "InvalidDelta";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::BelowThreshold: return "BelowThreshold";
    case ErrorCode::AboveThreshold: return "AboveThreshold";
    case ErrorCode::SameAsTruth: return "SameAsTruth";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::OutOfScaleRating: return "OutOfScaleRating";
    }
    return "Unknown";
}

/// Every domain failure in the library is reported as an Error carrying a
/// named code; the CLI prints the name verbatim.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message)
{
    throw Error(code, message);
}

} // namespace ratebound

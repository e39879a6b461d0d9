#pragma once

#include <stdexcept>
#include <string>

namespace lyapinfl {

enum class ErrorCode {
    EmptyInput,
    NonExpandingSlope,
    NonFinite,
    GeometryViolation,
    EmptySum,
    TangentialAmbiguity,
    DegenerateSpectrum,
    AlphaOutOfDomain,
    SingleBranch,
    NotApplicable,
    CapExceeded,
    BasePatternViolation,
    NoSignChange,
    InvalidArgument,
    Parse,
};

inline const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonExpandingSlope: return "NonExpandingSlope";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::GeometryViolation: return "GeometryViolation";
    case ErrorCode::EmptySum: return "EmptySum";
    case ErrorCode::TangentialAmbiguity: return "TangentialAmbiguity";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::AlphaOutOfDomain: return "AlphaOutOfDomain";
    case ErrorCode::SingleBranch: return "SingleBranch";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::BasePatternViolation: return "BasePatternViolation";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

/// Single exception type for every failure in the library; callers switch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace lyapinfl

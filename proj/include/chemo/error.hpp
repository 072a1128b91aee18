#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chemo {

enum class ErrorCode {
    NegativeConstant,
    NonpositiveMass,
    BadTheta,
    TooCoarse,
    BadGrid,
    ZeroDensity,
    BadRadius,
    NegativeDensity,
    GridMismatch,
    Supercritical,
    SolverDiverged,
    Oscillation,
    GammaZero,
    AtBlowdown,
    HypothesisViolated,
    NoRoot,
    MonotonicityLost,
    StepRejected,
    Stalled,
    TooFewPoints,
    AsymmetricMatrix,
    NoRealRoot,
    BadFlowConfig,
    InvalidArgument,
    ParseError,
    UnknownKey,
    DegenerateQuadraticForm,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure in the library is reported as a chemo::Error carrying a code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NegativeConstant: return "NegativeConstant";
    case ErrorCode::NonpositiveMass: return "NonpositiveMass";
    case ErrorCode::BadTheta: return "BadTheta";
    case ErrorCode::TooCoarse: return "TooCoarse";
    case ErrorCode::BadGrid: return "BadGrid";
    case ErrorCode::ZeroDensity: return "ZeroDensity";
    case ErrorCode::BadRadius: return "BadRadius";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::Supercritical: return "Supercritical";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::Oscillation: return "Oscillation";
    case ErrorCode::GammaZero: return "GammaZero";
    case ErrorCode::AtBlowdown: return "AtBlowdown";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::MonotonicityLost: return "MonotonicityLost";
    case ErrorCode::StepRejected: return "StepRejected";
    case ErrorCode::Stalled: return "Stalled";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorCode::NoRealRoot: return "NoRealRoot";
    case ErrorCode::BadFlowConfig: return "BadFlowConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::DegenerateQuadraticForm: return "DegenerateQuadraticForm";
    }
    return "Unknown";
}

} // namespace chemo

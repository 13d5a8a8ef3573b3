#include "acx/error.hpp"

namespace acx {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Parse: return "ParseError";
        case ErrorCode::Io: return "IoError";
        case ErrorCode::TieDetected: return "TieDetected";
        case ErrorCode::MissingClass: return "MissingClass";
        case ErrorCode::Range: return "RangeError";
        case ErrorCode::Domain: return "DomainError";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::MaxIterations: return "MaxIterations";
        case ErrorCode::InfeasibleStart: return "InfeasibleStart";
        case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
        case ErrorCode::NoBracket: return "NoBracket";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::NoRecords: return "NoRecords";
    }
    return "Unknown";
}

}  // namespace acx

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace acx {

enum class ErrorCode {
    InvalidArgument,
    Parse,
    Io,
    TieDetected,
    MissingClass,
    Range,
    Domain,
    ConvergenceFailure,
    MaxIterations,
    InfeasibleStart,
    ToleranceNotMet,
    NoBracket,
    SingularCovariance,
    NoRecords,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised by win_counts under the strict tie policy.
class TieDetected : public Error {
public:
    TieDetected(std::size_t count, const std::string& what)
        : Error(ErrorCode::TieDetected, what), count_(count) {}
    std::size_t count() const noexcept { return count_; }

private:
    std::size_t count_;
};

// CONS failure. closest_feasible_anchor is set when the anchor is out of reach of the grid.
class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, double kkt_residual, double closest_feasible_anchor)
        : Error(ErrorCode::ConvergenceFailure, what),
          kkt_residual_(kkt_residual),
          closest_feasible_anchor_(closest_feasible_anchor) {}
    double kkt_residual() const noexcept { return kkt_residual_; }
    double closest_feasible_anchor() const noexcept { return closest_feasible_anchor_; }

private:
    double kkt_residual_;
    double closest_feasible_anchor_;
};

}  // namespace acx

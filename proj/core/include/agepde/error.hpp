#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agepde {

enum class ErrorCode {
    NonIntegerStepRatio,
    InvalidDimension,
    InvalidArgument,
    RectOffGrid,
    MissingContext,
    TraceFlagMissing,
    LinearSolveDiverged,
    StiffSourceStep,
    Overflow,
    PreconditionViolated,
    FluxMismatch,
    BreakpointOffGrid,
    PowerIterationStalled,
    MissingKey,
    UnknownKey,
    TypeError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` carries the failure kind.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// True for failures of a numerical procedure (solver, iteration) rather than bad input.
    bool is_numerical() const noexcept {
        return code_ == ErrorCode::LinearSolveDiverged || code_ == ErrorCode::StiffSourceStep ||
               code_ == ErrorCode::PowerIterationStalled || code_ == ErrorCode::Overflow;
    }

private:
    ErrorCode code_;
};

}  // namespace agepde

#pragma once

#include <stdexcept>
#include <string>

namespace msweep {

/// Failure categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
    InvalidArgument,
    OutOfReach,
    NonSmoothPoint,
    TimeOutOfHorizon,
    SizeMismatch,
    ParameterOutOfRange,
    DriftSingularity,
    DeclaredBoundViolated,
    MeshMismatch,
    PreconditionViolated,
    ConstantMismatch,
    SamplingStarved,
    EmptyAdmissibleSet,
    ParseError,
    ValidationError,
    IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace msweep

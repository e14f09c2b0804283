#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pdmdirac {

enum class ErrorCode {
    InvalidParameter = 1,
    Domain,
    QuadratureFailure,
    ZetaCrossing,
    ApproximationInvalid,
    InsufficientResolution,
    NonConvergence,
    ImaginaryEnergy,
    SubGap,
    NonNormalizable,
    SingularNode,
    Config,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Base error for every failure raised by the library. The code is what the
/// C API and the command-line runner translate into status values.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double partial, double error_estimate)
        : Error(ErrorCode::QuadratureFailure, what), partial_(partial), error_estimate_(error_estimate) {}
    double partial_estimate() const noexcept { return partial_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double partial_;
    double error_estimate_;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history)
        : Error(ErrorCode::NonConvergence, what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

}  // namespace pdmdirac

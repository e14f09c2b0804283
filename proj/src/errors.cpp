#include "pdmdirac/errors.hpp"

namespace pdmdirac {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidParameter: return "invalid-parameter";
        case ErrorCode::Domain: return "domain";
        case ErrorCode::QuadratureFailure: return "quadrature-failure";
        case ErrorCode::ZetaCrossing: return "zeta-crossing";
        case ErrorCode::ApproximationInvalid: return "approximation-invalid";
        case ErrorCode::InsufficientResolution: return "insufficient-resolution";
        case ErrorCode::NonConvergence: return "non-convergence";
        case ErrorCode::ImaginaryEnergy: return "imaginary-energy";
        case ErrorCode::SubGap: return "sub-gap";
        case ErrorCode::NonNormalizable: return "non-normalizable";
        case ErrorCode::SingularNode: return "singular-node";
        case ErrorCode::Config: return "config";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

}  // namespace pdmdirac

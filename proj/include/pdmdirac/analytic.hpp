#pragma once

#include "pdmdirac/profiles.hpp"

#include <complex>
#include <vector>

namespace pdmdirac {

/// Verified: the formula agrees with direct evaluation of the defining
/// equations. AsPublished: reproduced as printed, known to be inconsistent,
/// never used as ground truth.
enum class Provenance { Verified, AsPublished };

const char* to_string(Provenance p);

/// Which expression to use for the Poschl-Teller exponent s.
///   Verified:    s = 1/2 + sqrt(m0^2 v0^2 / alpha^2 - 1/16)
///   AsPublished: s = 1/2 + sqrt(m0^2 alpha^2 - 1/16)
enum class SVariant { Verified, AsPublished };

struct SpectrumValue {
    double plus = 0.0;
    double minus = 0.0;
    Provenance provenance = Provenance::Verified;
    const char* formula = "";  // short label of the closed form used
};

/// Closed-form bound-state energies.
///   CoshSquare      n >= 1   +/- sqrt((n pi alpha v0 / 2)^2 + m0^2 v0^4)
///   Rational        n >= 1   +/- sqrt((n alpha v0)^2 + m0^2 v0^4)
///   PoschlTeller    n >= 0   +/- (alpha v0 / 4) sqrt(1 + 16 (s + 2n)^2)
///   LinearSingular  n >= 0   +/- sqrt(A v0^3 (2n + 1) - v0^2 / 16)   (AsPublished)
///   ConstantRest    n == 0   +/- m0 c^2
/// ImaginaryEnergy when a radicand is negative; InvalidParameter for a bad n.
SpectrumValue spectrum_value(BuiltinModel model, int n, const ParamMap& params,
                             SVariant variant = SVariant::Verified);

/// The exponent s of the Poschl-Teller hole. InvalidParameter when s would be
/// complex.
double poschl_teller_s(const ParamMap& params, SVariant variant = SVariant::Verified);

/// Full single-hole ladder (alpha v0 / 4) sqrt(1 + 16 (s + k)^2), k = 0..count-1.
/// The even entries k = 2n are the published sequence; odd entries interleave.
std::vector<double> poschl_teller_ladder(const ParamMap& params, int count, SVariant variant = SVariant::Verified);

struct SpinorValue {
    std::complex<double> psi1;
    std::complex<double> psi2;
    double energy = 0.0;
    Provenance provenance = Provenance::Verified;
    bool normalized = false;
};

/// Closed-form components at x for the positive-energy state n.
/// CoshSquare and Rational are normalized with normalization_constant();
/// PoschlTeller and LinearSingular are left unnormalized, with psi2 from
/// psi2 = -i (v_F / zeta2) d/dx (sqrt(v_F) psi1) / sqrt(v_F) by a five-point
/// derivative. ConstantRest n = 0 is the zero-momentum spinor (1, 0).
SpinorValue bound_spinor(BuiltinModel model, int n, const ParamMap& params, double x,
                         SVariant variant = SVariant::Verified);

/// Normalization of the discrete constant-u states when phi = sin(...) has
/// unit amplitude: sqrt(alpha v0 / (2 E_n)) for CoshSquare and
/// sqrt(alpha v0 / (pi E_n)) for Rational.
double normalization_constant(BuiltinModel model, int n, const ParamMap& params);

/// The CoshSquare normalization printed for the unquantized family,
/// sqrt(alpha v0 k / (2 (k zeta1 + 2 alpha m0 v0^4))), k = sqrt(E^2 - A^2).
/// Kept for side-by-side reports only; it does not match quadrature.
double published_coshsquare_normalization(const ParamMap& params, double E);

/// Physicists' Hermite polynomial by the three-term recurrence.
double hermite(int n, double y);

/// Terminating Gauss series 2F1(-n, b; c; z) as a finite sum.
/// InvalidParameter when c is a non-positive integer.
double hyp2f1_polynomial(int n, double b, double c, double z);

}  // namespace pdmdirac

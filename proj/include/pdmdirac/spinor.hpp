#pragma once

#include "pdmdirac/eigensolver.hpp"
#include "pdmdirac/grid.hpp"
#include "pdmdirac/profiles.hpp"
#include "pdmdirac/transform.hpp"

#include <complex>
#include <vector>

namespace pdmdirac {

using Complex = std::complex<double>;

/// Two-component spinor sampled on the interior nodes of a q-grid.
/// psi1 is real and psi2 purely imaginary for every state built here.
struct SpinorField {
    QGrid grid;
    std::vector<double> q;
    std::vector<double> x;
    std::vector<double> v;  // v_F(x) at the nodes
    std::vector<Complex> psi1;
    std::vector<Complex> psi2;
    double E = 0.0;
    double norm_constant = 1.0;  // factor applied by the last normalize()
};

struct ObservableSet {
    std::vector<double> rho;  // |psi1|^2 + |psi2|^2
    std::vector<double> j;    // v_F (psi1* psi2 + psi1 psi2*)
    double total_prob = 0.0;  // integral of rho dx
};

/// x = invert(q) at the interior nodes of the grid.
std::vector<double> node_positions(const QGrid& grid, const TransformMap& map);

/// Builds the spinor from a reduced solution phi(q) and its q-derivative at
/// the interior nodes:
///   psi1 = sqrt(zeta2) phi / sqrt(v_F)
///   psi2 = -i [ v_F u' phi / (2 zeta2^{3/2}) + phi_q / sqrt(zeta2) ] / sqrt(v_F)
/// ZetaCrossing when E + m v_F^2 is not positive at some node, SingularNode
/// when a component comes out non-finite.
SpinorField reconstruct_from(const QGrid& grid, const std::vector<double>& x, const std::vector<double>& phi,
                             const std::vector<double>& dphi_dq, const ModelSpec& model, double E);

/// Same, from an eigenpair on `grid` (phi on all nodes). phi_q is taken by
/// fourth-order central differences, reflecting phi oddly through the
/// Dirichlet ends. The global sign makes psi1 positive on its first lobe.
SpinorField reconstruct(const EigenPair& pair, const QGrid& grid, const ModelSpec& model, const TransformMap& map,
                        double E);
SpinorField reconstruct(const EigenPair& pair, const QGrid& grid, const std::vector<double>& x,
                        const ModelSpec& model, double E);

/// Density and current at the nodes, and the total probability
/// integral rho dx = integral rho v_F dq by composite Simpson in q. The
/// values at the two grid ends are extrapolated from the nearest nodes.
/// NonNormalizable when rho v_F is still significant at a truncated end or
/// the integral is not a positive finite number.
ObservableSet observables(const SpinorField& spinor, const ModelSpec& model);

/// Scales both components by 1/sqrt(total_prob) and records that factor.
SpinorField normalize(const SpinorField& spinor, const ModelSpec& model);

/// Relative L2 residual of the coupled first-order system
///   -i F d/dx (F psi2) = zeta1 psi1,  -i F d/dx (F psi1) = zeta2 psi2,  F = sqrt(v_F),
/// computed in q with second-order central differences on the nodes that have
/// both neighbours. Since F d/dx F = d/dq on F psi, the q-space norm ratio
/// equals the x-space one.
double dirac_residual(const SpinorField& spinor, const ModelSpec& model, double E);

/// Unquantized state of a constant-u model at any E with E^2 >= A^2:
/// phi(q) = sin(k q) / k with k = sqrt(E^2 - A^2), q measured from the anchor
/// (the k -> 0 limit phi = q is used at E = A). Normalized numerically.
/// InvalidParameter unless u is constant, SubGap when E^2 < A^2,
/// NonNormalizable when the q-range is infinite.
SpinorField bic_family(const ModelSpec& model, double E, std::size_t intervals = 4000, double quad_tol = 1e-12);

}  // namespace pdmdirac

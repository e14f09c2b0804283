#pragma once

#include "pdmdirac/grid.hpp"
#include "pdmdirac/profiles.hpp"
#include "pdmdirac/transform.hpp"

#include <functional>
#include <vector>

namespace pdmdirac {

enum class PotentialMode { ExactAtEnergy, Approximate, ConstantU };

const char* to_string(PotentialMode mode);

/// Effective potential of the reduced scalar equation
///     -phi'' + V(q) phi = lambda phi
/// sampled on the interior nodes of a q-grid. `sampler` evaluates the same
/// potential at arbitrary q, which the eigensolver uses for grid refinement.
struct PotentialField {
    QGrid grid;
    std::vector<double> q;       // interior nodes 1 .. intervals-1
    std::vector<double> x;       // x = invert(q) at those nodes
    std::vector<double> values;
    std::vector<char> singular;  // node flagged: potential not trustworthy there
    PotentialMode mode = PotentialMode::Approximate;
    double energy = 0.0;      // ExactAtEnergy only
    double constant_u = 0.0;  // ConstantU only (the A in m v^2 = A)
    std::function<double(double)> sampler;

    bool any_singular() const;
};

/// zeta1 = E - m v^2 and zeta2 = E + m v^2.
struct ZetaPair {
    double zeta1 = 0.0;
    double zeta2 = 0.0;
};

ZetaPair zeta(const ModelSpec& model, double E, double x);

/// Pointwise exact potential at energy E:
///   v^2 [ 3/4 (z'/z)^2 - 1/2 z''/z - 1/2 (v'/v)(z'/z) ] + u^2,   z = E + u.
double exact_potential_at(const ModelSpec& model, double E, double x);

/// Pointwise non-relativistic potential:
///   3/16 u'^2/(m^2 v^2) - 1/4 [ u''/m + (v'/v) u'/m ] + u^2.
double approx_potential_at(const ModelSpec& model, double x);

/// Exact, energy-dependent potential. Throws ZetaCrossing when E + m v^2
/// changes sign inside the domain; nodes where it merely comes close to zero
/// are flagged singular.
PotentialField exact_potential(const ModelSpec& model, double E, const QGrid& grid, const TransformMap& map);

/// Energy-independent approximation. Throws ApproximationInvalid for a
/// massless model; interior nodes with m = 0 or a non-finite value are
/// flagged singular.
PotentialField approx_potential(const ModelSpec& model, const QGrid& grid, const TransformMap& map);

/// The constant A^2 field of models with m v^2 = A.
PotentialField constant_u_potential(double A, const QGrid& grid, const TransformMap& map);

using ClaimedPotential = std::function<double(double q, double x)>;

struct DiscrepancyReport {
    double max_abs = 0.0;
    double max_rel = 0.0;
    std::vector<double> q;
    std::vector<double> x;
    std::vector<double> computed;
    std::vector<double> claimed;
    std::vector<double> residual;  // computed - claimed
};

/// Compares approx_potential with a closed form node by node. Relative
/// deviation is taken against max(|computed|, |claimed|).
DiscrepancyReport potential_discrepancy_report(const ModelSpec& model, const ClaimedPotential& claimed,
                                               const QGrid& grid, const TransformMap& map);

}  // namespace pdmdirac

#pragma once

#include "pdmdirac/profiles.hpp"

#include <vector>

namespace pdmdirac {

enum class EndpointKind { Finite, Infinite };

/// The point canonical transformation q(x) = integral of dx / v_F from the
/// anchor x0, together with its inverse. Immutable once built.
///
/// A monotone table of (x, q) nodes is laid out from the anchor toward both
/// ends (uniform steps, then doubling distances toward an infinite end or
/// halving distances toward a finite one). Forward evaluation integrates from
/// the nearest node; inversion brackets with the table and polishes with
/// safeguarded Newton steps, using dq/dx = 1 / v_F.
class TransformMap {
public:
    double forward(double x) const;
    double inverse(double q) const;

    double q_lo() const { return q_lo_; }
    double q_hi() const { return q_hi_; }
    EndpointKind lo_kind() const { return lo_kind_; }
    EndpointKind hi_kind() const { return hi_kind_; }
    double anchor() const { return x0_; }
    double quad_tol() const { return tol_; }
    const VelocityProfile& velocity() const { return velocity_; }
    const Interval& domain() const { return velocity_.domain(); }

private:
    friend TransformMap build_transform(const VelocityProfile& velocity, double x0, double quad_tol);

    struct Node {
        double x;
        double q;
    };

    TransformMap(VelocityProfile velocity, double x0, double tol);

    double integrate(double a, double b, double tol) const;
    void explore(int direction);
    /// Walks past the table toward one end until the bracket reaches `q`.
    /// Returns the bracketing nodes in ascending x.
    std::pair<Node, Node> extend_bracket(double q) const;

    VelocityProfile velocity_;
    double x0_;
    double tol_;
    std::vector<Node> table_;  // ascending in x (and therefore in q)
    double q_lo_ = 0.0;
    double q_hi_ = 0.0;
    EndpointKind lo_kind_ = EndpointKind::Finite;
    EndpointKind hi_kind_ = EndpointKind::Finite;
};

/// Builds the map anchored at x0 (q(x0) = 0). Each improper end limit is
/// classified Finite when the contributions of successive doubling (or
/// halving) segments drop below quad_tol, and Infinite when they stop
/// shrinking. Throws QuadratureError if a segment integral fails to converge.
TransformMap build_transform(const VelocityProfile& velocity, double x0, double quad_tol);

/// The unique x in the domain with forward(x) = q. Domain error unless
/// q_lo < q < q_hi.
double invert(const TransformMap& map, double q);

}  // namespace pdmdirac

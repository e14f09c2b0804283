#pragma once

#include <cstddef>

namespace pdmdirac {

class TransformMap;

/// Uniform grid on [q_begin, q_end] with `intervals` cells. Nodes 0 and
/// `intervals` carry the Dirichlet condition; the interior nodes are the
/// unknowns, so no evaluation ever lands on a domain wall.
struct QGrid {
    double q_begin = 0.0;
    double q_end = 1.0;
    std::size_t intervals = 2;
    // True when that end cuts an infinite q-domain (the node is then a
    // regular point of the model rather than a wall).
    bool lo_truncated = false;
    bool hi_truncated = false;

    double h() const { return (q_end - q_begin) / static_cast<double>(intervals); }
    double node(std::size_t i) const { return q_begin + static_cast<double>(i) * h(); }
    std::size_t interior() const { return intervals - 1; }
    QGrid refined() const {
        QGrid g = *this;
        g.intervals *= 2;
        return g;
    }
};

/// Grid spanning the full q-range of a map with finite ends. Domain error if
/// either end is infinite (those need a truncation policy, see eigensolver).
QGrid make_grid(const TransformMap& map, std::size_t intervals);

}  // namespace pdmdirac

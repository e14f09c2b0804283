#include "pdmdirac/potential.hpp"

#include "pdmdirac/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace pdmdirac {

QGrid make_grid(const TransformMap& map, std::size_t intervals) {
    if (!std::isfinite(map.q_lo()) || !std::isfinite(map.q_hi()))
        throw Error(ErrorCode::Domain, "make_grid needs a finite q-domain; use a truncation policy instead");
    if (intervals < 2) throw Error(ErrorCode::InvalidParameter, "grid needs at least two intervals");
    QGrid g;
    g.q_begin = map.q_lo();
    g.q_end = map.q_hi();
    g.intervals = intervals;
    return g;
}

const char* to_string(PotentialMode mode) {
    switch (mode) {
        case PotentialMode::ExactAtEnergy: return "exact";
        case PotentialMode::Approximate: return "approximate";
        case PotentialMode::ConstantU: return "constant-u";
    }
    return "unknown";
}

bool PotentialField::any_singular() const {
    return std::any_of(singular.begin(), singular.end(), [](char c) { return c != 0; });
}

ZetaPair zeta(const ModelSpec& model, double E, double x) {
    const double u = product_u(model, x).u;
    return {E - u, E + u};
}

double exact_potential_at(const ModelSpec& model, double E, double x) {
    const ProductU p = product_u(model, x);
    const auto& vel = model.velocity();
    const double v = vel(x);
    const double dv = vel.deriv1(x);
    const double z = E + p.u;
    const double r1 = p.du / z;
    const double r2 = p.d2u / z;
    return v * v * (0.75 * r1 * r1 - 0.5 * r2 - 0.5 * (dv / v) * r1) + p.u * p.u;
}

double approx_potential_at(const ModelSpec& model, double x) {
    const ProductU p = product_u(model, x);
    const double m = model.mass()(x);
    const auto& vel = model.velocity();
    const double v = vel(x);
    const double dv = vel.deriv1(x);
    return 3.0 / 16.0 * p.du * p.du / (m * m * v * v) - 0.25 * (p.d2u / m + (dv / v) * (p.du / m)) + p.u * p.u;
}

namespace {

PotentialField skeleton(const QGrid& grid, const TransformMap& map) {
    if (grid.intervals < 2) throw Error(ErrorCode::InvalidParameter, "grid needs at least two intervals");
    if (grid.q_begin < map.q_lo() || grid.q_end > map.q_hi()) {
        std::ostringstream os;
        os << "grid [" << grid.q_begin << ", " << grid.q_end << "] leaves the q-domain (" << map.q_lo() << ", "
           << map.q_hi() << ")";
        throw Error(ErrorCode::Domain, os.str());
    }
    PotentialField f;
    f.grid = grid;
    const std::size_t n = grid.interior();
    f.q.resize(n);
    f.x.resize(n);
    f.values.assign(n, 0.0);
    f.singular.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        f.q[i] = grid.node(i + 1);
        f.x[i] = map.inverse(f.q[i]);
    }
    return f;
}

}  // namespace

PotentialField exact_potential(const ModelSpec& model, double E, const QGrid& grid, const TransformMap& map) {
    PotentialField f = skeleton(grid, map);
    f.mode = PotentialMode::ExactAtEnergy;
    f.energy = E;

    const double eps_zeta = 1e-10 * std::max(1.0, std::abs(E));
    bool seen_pos = false, seen_neg = false;
    auto note_sign = [&](double z) {
        if (z > eps_zeta) seen_pos = true;
        if (z < -eps_zeta) seen_neg = true;
    };
    for (double x : sample_interior(model.domain(), 1001)) {
        const double m = model.mass()(x);
        const double v = model.velocity()(x);
        const double u = m * v * v;
        if (std::isfinite(u)) note_sign(E + u);
    }
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        const double z = zeta(model, E, f.x[i]).zeta2;
        note_sign(z);
        if (std::abs(z) < eps_zeta) {
            f.singular[i] = 1;
            f.values[i] = NAN;
            continue;
        }
        f.values[i] = exact_potential_at(model, E, f.x[i]);
        if (!std::isfinite(f.values[i])) f.singular[i] = 1;
    }
    if (seen_pos && seen_neg) {
        std::ostringstream os;
        os << "E + m v^2 changes sign inside the domain at E=" << E << "; restrict the energy";
        throw Error(ErrorCode::ZetaCrossing, os.str());
    }

    auto shared_model = std::make_shared<const ModelSpec>(model);
    auto shared_map = std::make_shared<const TransformMap>(map);
    f.sampler = [shared_model, shared_map, E](double q) {
        return exact_potential_at(*shared_model, E, shared_map->inverse(q));
    };
    return f;
}

PotentialField approx_potential(const ModelSpec& model, const QGrid& grid, const TransformMap& map) {
    if (model.mass().is_massless())
        throw Error(ErrorCode::ApproximationInvalid,
                    "the non-relativistic potential divides by m(x) and is undefined for a massless model");
    PotentialField f = skeleton(grid, map);
    f.mode = PotentialMode::Approximate;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        const double m = model.mass()(f.x[i]);
        if (!(m > 0.0)) {
            f.singular[i] = 1;
            f.values[i] = NAN;
            continue;
        }
        f.values[i] = approx_potential_at(model, f.x[i]);
        if (!std::isfinite(f.values[i])) f.singular[i] = 1;
    }
    auto shared_model = std::make_shared<const ModelSpec>(model);
    auto shared_map = std::make_shared<const TransformMap>(map);
    f.sampler = [shared_model, shared_map](double q) {
        return approx_potential_at(*shared_model, shared_map->inverse(q));
    };
    return f;
}

PotentialField constant_u_potential(double A, const QGrid& grid, const TransformMap& map) {
    if (!(A >= 0.0) || !std::isfinite(A)) throw Error(ErrorCode::InvalidParameter, "constant A must be >= 0");
    PotentialField f = skeleton(grid, map);
    f.mode = PotentialMode::ConstantU;
    f.constant_u = A;
    std::fill(f.values.begin(), f.values.end(), A * A);
    f.sampler = [A](double) { return A * A; };
    return f;
}

DiscrepancyReport potential_discrepancy_report(const ModelSpec& model, const ClaimedPotential& claimed,
                                               const QGrid& grid, const TransformMap& map) {
    const PotentialField f = approx_potential(model, grid, map);
    DiscrepancyReport r;
    for (std::size_t i = 0; i < f.q.size(); ++i) {
        if (f.singular[i]) continue;
        const double c = claimed(f.q[i], f.x[i]);
        const double res = f.values[i] - c;
        const double scale = std::max(std::abs(f.values[i]), std::abs(c));
        const double rel = scale > 0.0 ? std::abs(res) / scale : 0.0;
        r.q.push_back(f.q[i]);
        r.x.push_back(f.x[i]);
        r.computed.push_back(f.values[i]);
        r.claimed.push_back(c);
        r.residual.push_back(res);
        r.max_abs = std::max(r.max_abs, std::abs(res));
        r.max_rel = std::max(r.max_rel, rel);
    }
    return r;
}

}  // namespace pdmdirac

#include "pdmdirac/transform.hpp"

#include "pdmdirac/errors.hpp"
#include "pdmdirac/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pdmdirac {

namespace {

// Geometric steps laid out toward each end. Once an end is classified the
// table keeps growing to this many steps so that inversion rarely needs to
// walk beyond it.
constexpr int kMaxGeometricSteps = 64;
// Number of consecutive non-shrinking contributions that marks divergence.
constexpr int kDivergenceRun = 6;

}  // namespace

TransformMap::TransformMap(VelocityProfile velocity, double x0, double tol)
    : velocity_(std::move(velocity)), x0_(x0), tol_(tol) {}

double TransformMap::integrate(double a, double b, double tol) const {
    const auto& v = velocity_;
    auto r = integrate_adaptive([&v](double x) { return 1.0 / v(x); }, a, b, tol);
    if (!r.converged) {
        std::ostringstream os;
        os << "quadrature of 1/v_F on [" << a << ", " << b << "] did not converge (estimate " << r.value
           << ", error " << r.abs_error << ")";
        throw QuadratureError(os.str(), r.value, r.abs_error);
    }
    return r.value;
}

void TransformMap::explore(int direction) {
    const Interval& dom = velocity_.domain();
    const double end = direction > 0 ? dom.hi : dom.lo;
    const bool end_finite = std::isfinite(end);
    const double seg_tol = tol_ / 128.0;

    std::vector<Node> nodes;
    double x_prev = x0_;
    double q_acc = 0.0;
    auto step_to = [&](double x) {
        const double c = integrate(x_prev, x, seg_tol);
        q_acc += c;
        nodes.push_back({x, q_acc});
        x_prev = x;
        return std::abs(c);
    };

    // Uniform approach covering half the distance to a finite end, or one
    // unit length toward an infinite one.
    const double reach = end_finite ? std::abs(end - x0_) : std::max(1.0, std::abs(x0_));
    const int uniform_steps = 4;
    for (int j = 1; j <= uniform_steps; ++j) {
        const double frac = end_finite ? 0.5 * j / uniform_steps : static_cast<double>(j) / uniform_steps;
        step_to(x0_ + direction * reach * frac);
    }

    double prev_c = -1.0;
    double last_ratio = 1.0;
    int non_shrinking = 0;
    bool decided = false;
    bool finite_limit = false;
    double tail = 0.0;
    for (int k = 1; k <= kMaxGeometricSteps; ++k) {
        const double x = end_finite ? end - direction * reach * std::ldexp(0.5, -k)
                                    : x0_ + direction * reach * std::ldexp(1.0, k);
        if (!dom.contains(x) || x == x_prev) {
            // Floating-point exhaustion next to a finite end.
            if (!decided) {
                finite_limit = last_ratio < 0.95;
                if (finite_limit && prev_c > 0.0) tail = prev_c * last_ratio / (1.0 - last_ratio);
                decided = true;
            }
            break;
        }
        const double c = step_to(x);
        if (decided) continue;
        if (prev_c > 0.0) last_ratio = c / prev_c;
        if (c <= seg_tol || (c <= tol_ && prev_c > 0.0 && last_ratio < 0.5)) {
            finite_limit = true;
            if (prev_c > 0.0 && last_ratio > 0.0 && last_ratio < 1.0) tail = c * last_ratio / (1.0 - last_ratio);
            decided = true;
            // Saturated: further nodes would carry no information.
            break;
        }
        non_shrinking = (prev_c > 0.0 && last_ratio >= 0.999) ? non_shrinking + 1 : 0;
        if (non_shrinking >= kDivergenceRun) {
            finite_limit = false;
            decided = true;
        }
        prev_c = c;
    }
    if (!decided) {
        // Still shrinking slowly after the full budget; treat as divergent.
        finite_limit = false;
    }

    const double limit = finite_limit ? q_acc + direction * tail : direction * INFINITY;
    const EndpointKind kind = finite_limit ? EndpointKind::Finite : EndpointKind::Infinite;
    if (direction > 0) {
        q_hi_ = limit;
        hi_kind_ = kind;
    } else {
        q_lo_ = limit;
        lo_kind_ = kind;
    }
    table_.insert(table_.end(), nodes.begin(), nodes.end());
}

TransformMap build_transform(const VelocityProfile& velocity, double x0, double quad_tol) {
    if (!(quad_tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "build_transform requires quad_tol > 0");
    if (!velocity.domain().contains(x0)) throw Error(ErrorCode::Domain, "anchor x0 must lie inside the domain");
    TransformMap map(velocity, x0, quad_tol);
    map.table_.push_back({x0, 0.0});
    map.explore(+1);
    map.explore(-1);
    std::sort(map.table_.begin(), map.table_.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
    return map;
}

double TransformMap::forward(double x) const {
    if (!domain().contains(x)) {
        std::ostringstream os;
        os << "x=" << x << " is outside the open domain of the transformation";
        throw Error(ErrorCode::Domain, os.str());
    }
    auto it = std::upper_bound(table_.begin(), table_.end(), x, [](double v, const Node& n) { return v < n.x; });
    const Node* base = nullptr;
    if (it == table_.begin()) {
        base = &table_.front();
    } else if (it == table_.end()) {
        base = &table_.back();
    } else {
        const Node& left = *(it - 1);
        const Node& right = *it;
        base = (x - left.x <= right.x - x) ? &left : &right;
    }
    return base->q + integrate(base->x, x, tol_ / 4.0);
}

std::pair<TransformMap::Node, TransformMap::Node> TransformMap::extend_bracket(double q) const {
    const int direction = q > table_.back().q ? +1 : -1;
    const Node start = direction > 0 ? table_.back() : table_.front();
    const double end = direction > 0 ? domain().hi : domain().lo;
    Node cur = start;
    for (int k = 0; k < 4096; ++k) {
        double next_x = 0.0;
        if (std::isfinite(end)) {
            next_x = 0.5 * (cur.x + end);
        } else {
            const double dist = std::max(1.0, std::abs(cur.x - x0_));
            next_x = cur.x + direction * dist;
        }
        if (!domain().contains(next_x) || next_x == cur.x) break;
        const Node next{next_x, cur.q + integrate(cur.x, next_x, tol_ / 128.0)};
        if (next.q == cur.q && !std::isfinite(end) && direction * (q - cur.q) > 0) {
            // 1/v_F underflowed; q cannot advance any further.
            break;
        }
        if ((direction > 0 && next.q >= q) || (direction < 0 && next.q <= q))
            return direction > 0 ? std::make_pair(cur, next) : std::make_pair(next, cur);
        cur = next;
    }
    std::ostringstream os;
    os << "q=" << q << " cannot be resolved from the endpoint in double precision";
    throw Error(ErrorCode::Domain, os.str());
}

double TransformMap::inverse(double q) const {
    if (!(q > q_lo_ && q < q_hi_)) {
        std::ostringstream os;
        os << "q=" << q << " is outside (" << q_lo_ << ", " << q_hi_ << ")";
        throw Error(ErrorCode::Domain, os.str());
    }
    Node lo, hi;
    auto it = std::upper_bound(table_.begin(), table_.end(), q, [](double v, const Node& n) { return v < n.q; });
    if (it != table_.begin() && it != table_.end()) {
        lo = *(it - 1);
        hi = *it;
    } else {
        std::tie(lo, hi) = extend_bracket(q);
    }
    if (lo.q == q) return lo.x;
    if (hi.q == q) return hi.x;

    const double q_tol = 0.5e-12 * std::max(1.0, std::abs(q));
    const double local_tol = std::min(tol_, 1e-14 * std::max(1.0, std::abs(q)));
    // Start from the secant through the bracket.
    double x = lo.x + (q - lo.q) * (hi.x - lo.x) / (hi.q - lo.q);
    if (!(x > lo.x && x < hi.x)) x = 0.5 * (lo.x + hi.x);
    for (int iter = 0; iter < 200; ++iter) {
        const Node& ref = (x - lo.x <= hi.x - x) ? lo : hi;
        const double qx = ref.q + integrate(ref.x, x, local_tol);
        const double g = qx - q;
        if (std::abs(g) <= q_tol) return x;
        if (g < 0) lo = {x, qx};
        else hi = {x, qx};
        if (hi.x - lo.x <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo.x), std::abs(hi.x)))
            return x;
        double next = x - g * velocity_(x);
        if (!(next > lo.x && next < hi.x)) next = 0.5 * (lo.x + hi.x);
        x = next;
    }
    return x;
}

double invert(const TransformMap& map, double q) { return map.inverse(q); }

}  // namespace pdmdirac

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pdmdirac {

using RealFn = std::function<double(double)>;
using ParamMap = std::map<std::string, double>;

/// Open interval (lo, hi); either end may be infinite.
struct Interval {
    double lo = -INFINITY;
    double hi = INFINITY;

    bool contains(double x) const { return x > lo && x < hi; }
    bool lo_finite() const { return std::isfinite(lo); }
    bool hi_finite() const { return std::isfinite(hi); }
};

/// Deterministic interior sample of `count` points. Infinite ends are reached
/// through an algebraic map of a uniform parameter, so the sample spreads
/// over several decades without landing on an endpoint. `inner_fraction`
/// below one restricts the parameter to the central part of its range.
std::vector<double> sample_interior(const Interval& domain, std::size_t count, double inner_fraction = 1.0);

/// A smooth real profile with first and second derivatives. Missing
/// derivatives fall back to five-point finite differences, and the profile
/// remembers that it did so.
class Profile {
public:
    double operator()(double x) const { return eval_(x); }
    double deriv1(double x) const;
    double deriv2(double x) const;
    const Interval& domain() const { return domain_; }
    bool uses_finite_differences() const { return fd_first_ || fd_second_; }

protected:
    Profile(RealFn eval, RealFn d1, RealFn d2, Interval domain);
    void check_derivatives(const char* what) const;

private:
    double fd_step(double x) const;

    RealFn eval_;
    RealFn d1_;
    RealFn d2_;
    Interval domain_;
    bool fd_first_ = false;
    bool fd_second_ = false;
};

/// Fermi velocity v_F(x). Strictly positive on the interior of its domain.
class VelocityProfile : public Profile {
public:
    VelocityProfile(RealFn eval, RealFn d1, RealFn d2, Interval domain);
};

/// Rest mass m(x). Non-negative on the interior; identically zero is allowed.
class MassProfile : public Profile {
public:
    MassProfile(RealFn eval, RealFn d1, RealFn d2, Interval domain);

    bool is_massless() const { return massless_; }

private:
    bool massless_ = false;
};

enum class BuiltinModel { CoshSquare, Rational, PoschlTeller, LinearSingular, ConstantRest };

std::optional<BuiltinModel> parse_builtin_model(std::string_view name);
std::string_view to_string(BuiltinModel model);

class ModelSpec {
public:
    /// `anchor` is the point where q(x) = 0. When omitted it is chosen from the
    /// domain: the midpoint of a finite domain, zero for the full line, one unit
    /// inside a half line.
    ModelSpec(MassProfile mass, VelocityProfile velocity, ParamMap params, std::string label,
              std::optional<double> anchor = std::nullopt);

    const MassProfile& mass() const { return mass_; }
    const VelocityProfile& velocity() const { return velocity_; }
    const Interval& domain() const { return velocity_.domain(); }
    const ParamMap& params() const { return params_; }
    const std::string& label() const { return label_; }
    std::optional<BuiltinModel> builtin() const { return builtin_; }
    double anchor() const { return anchor_; }

    /// Throws InvalidParameter naming the key when it is absent.
    double param(const std::string& key) const;

private:
    friend ModelSpec builtin_model(BuiltinModel, const ParamMap&);

    MassProfile mass_;
    VelocityProfile velocity_;
    ParamMap params_;
    std::string label_;
    double anchor_ = 0.0;
    std::optional<BuiltinModel> builtin_;
};

/// Builds one of the shipped models.
///
///   CoshSquare      m = m0 / cosh^4(alpha x),      v = v0 cosh^2(alpha x),  x in R
///   Rational        m = m0 / (1 + alpha^2 x^2)^2,  v = v0 (1 + alpha^2 x^2), x in R
///   PoschlTeller    m = m0 / sin(alpha (x - x_shift)), v = v0,  x in (x_shift, x_shift + pi/alpha)
///   LinearSingular  m = A / x,                      v = v0 x,               x in (0, inf)
///   ConstantRest    m = m0,                         v = c,                  x in R
///
/// Keys: alpha, v0, m0, A, c, x_shift (PoschlTeller only, default 0).
ModelSpec builtin_model(BuiltinModel model, const ParamMap& params);

struct ProductU {
    double u = 0.0;
    double du = 0.0;
    double d2u = 0.0;
};

/// u = m v_F^2 and its first two derivatives at an interior point.
ProductU product_u(const ModelSpec& model, double x);

/// Returns A when u(x) = m v_F^2 stays within tol * max(1, |u(x0)|) of its
/// value at the anchor over a dense interior sample.
std::optional<double> detect_constant_u(const ModelSpec& model, double tol);

}  // namespace pdmdirac

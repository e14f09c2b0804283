#include "pdmdirac/profiles.hpp"

#include "pdmdirac/errors.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace pdmdirac {

namespace {

constexpr std::size_t kPositivitySamples = 1001;
constexpr std::size_t kDerivativeSamples = 100;

double five_point_d1(const RealFn& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

double five_point_d2(const RealFn& f, double x, double h) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
}

double distance_to_ends(const Interval& d, double x) {
    double dist = INFINITY;
    if (d.lo_finite()) dist = std::min(dist, x - d.lo);
    if (d.hi_finite()) dist = std::min(dist, d.hi - x);
    return dist;
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidParameter, msg); }

}  // namespace

std::vector<double> sample_interior(const Interval& d, std::size_t count, double inner_fraction) {
    std::vector<double> xs;
    xs.reserve(count);
    const double margin = 0.5 * (1.0 - inner_fraction);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = margin + inner_fraction * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
        double x = 0.0;
        if (d.lo_finite() && d.hi_finite()) {
            x = d.lo + t * (d.hi - d.lo);
        } else if (d.lo_finite()) {
            x = d.lo + t / (1.0 - t);
        } else if (d.hi_finite()) {
            x = d.hi - (1.0 - t) / t;
        } else {
            const double y = 2.0 * t - 1.0;
            x = y / (1.0 - y * y);
        }
        if (d.contains(x)) xs.push_back(x);
    }
    return xs;
}

Profile::Profile(RealFn eval, RealFn d1, RealFn d2, Interval domain)
    : eval_(std::move(eval)), d1_(std::move(d1)), d2_(std::move(d2)), domain_(domain) {
    if (!eval_) invalid("profile requires an evaluation function");
    if (!(domain_.lo < domain_.hi)) invalid("profile domain must satisfy lo < hi");
    fd_first_ = !d1_;
    fd_second_ = !d2_;
}

double Profile::fd_step(double x) const {
    return 1e-3 * std::min(1.0, 0.25 * distance_to_ends(domain_, x));
}

double Profile::deriv1(double x) const {
    if (d1_) return d1_(x);
    return five_point_d1(eval_, x, fd_step(x));
}

double Profile::deriv2(double x) const {
    if (d2_) return d2_(x);
    return five_point_d2(eval_, x, fd_step(x));
}

void Profile::check_derivatives(const char* what) const {
    if (!d1_ && !d2_) return;
    for (double x : sample_interior(domain_, kDerivativeSamples, 0.9)) {
        const double f = eval_(x);
        const double a1 = d1_ ? d1_(x) : 0.0;
        const double a2 = d2_ ? d2_(x) : 0.0;
        if (!std::isfinite(f) || !std::isfinite(a1) || !std::isfinite(a2)) continue;
        // Local length scale keeps the stencil inside the region where the
        // profile varies slowly.
        double scale = std::min(1.0, 0.25 * distance_to_ends(domain_, x));
        if (a1 != 0.0 && f != 0.0) scale = std::min(scale, std::abs(f / a1));
        if (a2 != 0.0 && f != 0.0) scale = std::min(scale, std::sqrt(std::abs(f / a2)));
        const double h = 1e-3 * scale;
        if (d1_) {
            const double fd = five_point_d1(eval_, x, h);
            const double floor = 1e-2 * std::abs(f) / scale;
            if (std::abs(a1 - fd) > 1e-6 * std::max(std::abs(a1), floor)) {
                std::ostringstream os;
                os << what << ": first derivative disagrees with finite differences at x=" << x << " (analytic "
                   << a1 << ", numeric " << fd << ")";
                invalid(os.str());
            }
        }
        if (d2_) {
            const double fd = five_point_d2(eval_, x, h);
            const double floor = 1e-2 * std::abs(f) / (scale * scale);
            if (std::abs(a2 - fd) > 1e-6 * std::max(std::abs(a2), floor)) {
                std::ostringstream os;
                os << what << ": second derivative disagrees with finite differences at x=" << x << " (analytic "
                   << a2 << ", numeric " << fd << ")";
                invalid(os.str());
            }
        }
    }
}

VelocityProfile::VelocityProfile(RealFn eval, RealFn d1, RealFn d2, Interval domain)
    : Profile(std::move(eval), std::move(d1), std::move(d2), domain) {
    for (double x : sample_interior(this->domain(), kPositivitySamples)) {
        const double v = (*this)(x);
        if (!(v > 0.0)) {
            std::ostringstream os;
            os << "velocity profile must be positive on the domain interior; v(" << x << ") = " << v;
            invalid(os.str());
        }
    }
    check_derivatives("velocity profile");
}

MassProfile::MassProfile(RealFn eval, RealFn d1, RealFn d2, Interval domain)
    : Profile(std::move(eval), std::move(d1), std::move(d2), domain) {
    massless_ = true;
    for (double x : sample_interior(this->domain(), kPositivitySamples)) {
        const double m = (*this)(x);
        if (std::isnan(m) || m < 0.0) {
            std::ostringstream os;
            os << "mass profile must be non-negative on the domain interior; m(" << x << ") = " << m;
            invalid(os.str());
        }
        if (m != 0.0) massless_ = false;
    }
    check_derivatives("mass profile");
}

std::optional<BuiltinModel> parse_builtin_model(std::string_view name) {
    if (name == "CoshSquare") return BuiltinModel::CoshSquare;
    if (name == "Rational") return BuiltinModel::Rational;
    if (name == "PoschlTeller") return BuiltinModel::PoschlTeller;
    if (name == "LinearSingular") return BuiltinModel::LinearSingular;
    if (name == "ConstantRest") return BuiltinModel::ConstantRest;
    return std::nullopt;
}

std::string_view to_string(BuiltinModel model) {
    switch (model) {
        case BuiltinModel::CoshSquare: return "CoshSquare";
        case BuiltinModel::Rational: return "Rational";
        case BuiltinModel::PoschlTeller: return "PoschlTeller";
        case BuiltinModel::LinearSingular: return "LinearSingular";
        case BuiltinModel::ConstantRest: return "ConstantRest";
    }
    return "unknown";
}

namespace {

void check_param_values(const ParamMap& params) {
    for (const auto& [key, value] : params) {
        if (!std::isfinite(value)) invalid("parameter '" + key + "' must be finite");
        const bool strictly_positive = key == "alpha" || key == "v0" || key == "c";
        const bool non_negative = key == "m0" || key == "A";
        if (strictly_positive && !(value > 0.0)) invalid("parameter '" + key + "' must be positive");
        if (non_negative && value < 0.0) invalid("parameter '" + key + "' must be non-negative");
    }
}

double default_anchor(const Interval& d) {
    if (d.lo_finite() && d.hi_finite()) return 0.5 * (d.lo + d.hi);
    if (d.lo_finite()) return d.lo + 1.0;
    if (d.hi_finite()) return d.hi - 1.0;
    return 0.0;
}

}  // namespace

ModelSpec::ModelSpec(MassProfile mass, VelocityProfile velocity, ParamMap params, std::string label,
                     std::optional<double> anchor)
    : mass_(std::move(mass)), velocity_(std::move(velocity)), params_(std::move(params)), label_(std::move(label)) {
    const Interval& dm = mass_.domain();
    const Interval& dv = velocity_.domain();
    if (dm.lo != dv.lo || dm.hi != dv.hi) invalid("mass and velocity profiles must share one domain");
    check_param_values(params_);
    anchor_ = anchor.value_or(default_anchor(dv));
    if (!dv.contains(anchor_)) invalid("anchor must lie strictly inside the domain");
}

double ModelSpec::param(const std::string& key) const {
    auto it = params_.find(key);
    if (it == params_.end()) invalid("missing parameter '" + key + "'");
    return it->second;
}

ModelSpec builtin_model(BuiltinModel model, const ParamMap& params) {
    auto require = [&](const char* key) {
        auto it = params.find(key);
        if (it == params.end()) invalid(std::string("missing parameter '") + key + "' for model " +
                                        std::string(to_string(model)));
        return it->second;
    };
    auto allow_only = [&](std::initializer_list<const char*> keys) {
        for (const auto& [key, value] : params) {
            (void)value;
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
                invalid("unknown parameter '" + key + "' for model " + std::string(to_string(model)));
        }
    };
    check_param_values(params);

    const std::string label(to_string(model));
    switch (model) {
        case BuiltinModel::CoshSquare: {
            allow_only({"alpha", "v0", "m0"});
            const double a = require("alpha"), v0 = require("v0"), m0 = require("m0");
            const Interval dom{-INFINITY, INFINITY};
            MassProfile m(
                [=](double x) { return m0 / std::pow(std::cosh(a * x), 4); },
                [=](double x) { return -4 * a * m0 * std::tanh(a * x) / std::pow(std::cosh(a * x), 4); },
                [=](double x) {
                    const double t = std::tanh(a * x), c = std::cosh(a * x);
                    return 4 * a * a * m0 * (4 * t * t - 1 / (c * c)) / std::pow(c, 4);
                },
                dom);
            VelocityProfile v([=](double x) { return v0 * std::pow(std::cosh(a * x), 2); },
                              [=](double x) { return a * v0 * std::sinh(2 * a * x); },
                              [=](double x) { return 2 * a * a * v0 * std::cosh(2 * a * x); }, dom);
            ModelSpec spec(std::move(m), std::move(v), params, label, 0.0);
            spec.builtin_ = model;
            return spec;
        }
        case BuiltinModel::Rational: {
            allow_only({"alpha", "v0", "m0"});
            const double a = require("alpha"), v0 = require("v0"), m0 = require("m0");
            const Interval dom{-INFINITY, INFINITY};
            MassProfile m(
                [=](double x) {
                    const double w = 1 + a * a * x * x;
                    return m0 / (w * w);
                },
                [=](double x) {
                    const double w = 1 + a * a * x * x;
                    return -4 * m0 * a * a * x / (w * w * w);
                },
                [=](double x) {
                    const double w = 1 + a * a * x * x;
                    return 4 * m0 * a * a * (5 * a * a * x * x - 1) / (w * w * w * w);
                },
                dom);
            VelocityProfile v([=](double x) { return v0 * (1 + a * a * x * x); },
                              [=](double x) { return 2 * v0 * a * a * x; }, [=](double) { return 2 * v0 * a * a; },
                              dom);
            ModelSpec spec(std::move(m), std::move(v), params, label, 0.0);
            spec.builtin_ = model;
            return spec;
        }
        case BuiltinModel::PoschlTeller: {
            allow_only({"alpha", "v0", "m0", "x_shift"});
            const double a = require("alpha"), v0 = require("v0"), m0 = require("m0");
            const double shift = params.count("x_shift") ? params.at("x_shift") : 0.0;
            const Interval dom{shift, shift + std::numbers::pi / a};
            MassProfile m([=](double x) { return m0 / std::sin(a * (x - shift)); },
                          [=](double x) {
                              const double s = std::sin(a * (x - shift));
                              return -m0 * a * std::cos(a * (x - shift)) / (s * s);
                          },
                          [=](double x) {
                              const double s = std::sin(a * (x - shift)), c = std::cos(a * (x - shift));
                              return m0 * a * a * (1 + c * c) / (s * s * s);
                          },
                          dom);
            VelocityProfile v([=](double) { return v0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
                              dom);
            ModelSpec spec(std::move(m), std::move(v), params, label, 0.5 * (dom.lo + dom.hi));
            spec.builtin_ = model;
            return spec;
        }
        case BuiltinModel::LinearSingular: {
            allow_only({"A", "v0"});
            const double A = require("A"), v0 = require("v0");
            const Interval dom{0.0, INFINITY};
            MassProfile m([=](double x) { return A / x; }, [=](double x) { return -A / (x * x); },
                          [=](double x) { return 2 * A / (x * x * x); }, dom);
            VelocityProfile v([=](double x) { return v0 * x; }, [=](double) { return v0; },
                              [](double) { return 0.0; }, dom);
            ModelSpec spec(std::move(m), std::move(v), params, label, 1.0);
            spec.builtin_ = model;
            return spec;
        }
        case BuiltinModel::ConstantRest: {
            allow_only({"m0", "c"});
            const double m0 = require("m0"), c = require("c");
            const Interval dom{-INFINITY, INFINITY};
            MassProfile m([=](double) { return m0; }, [](double) { return 0.0; }, [](double) { return 0.0; }, dom);
            VelocityProfile v([=](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; },
                              dom);
            ModelSpec spec(std::move(m), std::move(v), params, label, 0.0);
            spec.builtin_ = model;
            return spec;
        }
    }
    invalid("unknown builtin model");
}

ProductU product_u(const ModelSpec& model, double x) {
    if (!model.domain().contains(x)) {
        std::ostringstream os;
        os << "x=" << x << " is not strictly inside the model domain";
        throw Error(ErrorCode::Domain, os.str());
    }
    const auto& m = model.mass();
    const auto& v = model.velocity();
    const double m0 = m(x), m1 = m.deriv1(x), m2 = m.deriv2(x);
    const double v0 = v(x), v1 = v.deriv1(x), v2 = v.deriv2(x);
    ProductU p;
    p.u = m0 * v0 * v0;
    p.du = m1 * v0 * v0 + 2 * m0 * v0 * v1;
    p.d2u = m2 * v0 * v0 + 4 * m1 * v0 * v1 + 2 * m0 * (v1 * v1 + v0 * v2);
    if (!std::isfinite(p.u) || !std::isfinite(p.du) || !std::isfinite(p.d2u)) {
        std::ostringstream os;
        os << "m v^2 is not representable at x=" << x;
        throw Error(ErrorCode::Domain, os.str());
    }
    return p;
}

std::optional<double> detect_constant_u(const ModelSpec& model, double tol) {
    if (!(tol > 0.0)) invalid("detect_constant_u requires tol > 0");
    const double ref = product_u(model, model.anchor()).u;
    const double bound = tol * std::max(1.0, std::abs(ref));
    for (double x : sample_interior(model.domain(), kPositivitySamples)) {
        const double m = model.mass()(x);
        const double v = model.velocity()(x);
        const double u = m * v * v;
        // Far tails where m or v under/overflows carry no information.
        if (!std::isfinite(u) || (m == 0.0 && !model.mass().is_massless())) continue;
        if (std::abs(u - ref) > bound) return std::nullopt;
    }
    return ref;
}

}  // namespace pdmdirac

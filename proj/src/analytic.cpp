#include "pdmdirac/analytic.hpp"

#include "pdmdirac/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pdmdirac {

namespace {

using std::numbers::pi;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidParameter, what); }

double checked_sqrt(double r, const char* what) {
    if (r < 0.0) {
        std::ostringstream os;
        os << what << ": radicand " << r << " < 0";
        throw Error(ErrorCode::ImaginaryEnergy, os.str());
    }
    return std::sqrt(r);
}

void require_n(BuiltinModel model, int n) {
    switch (model) {
        case BuiltinModel::CoshSquare:
        case BuiltinModel::Rational:
            if (n < 1) invalid("state index n starts at 1 for this model");
            break;
        case BuiltinModel::PoschlTeller:
        case BuiltinModel::LinearSingular:
            if (n < 0) invalid("state index n must be >= 0");
            break;
        case BuiltinModel::ConstantRest:
            if (n != 0) invalid("ConstantRest has only the n = 0 threshold state");
            break;
    }
}

// Shifted argument of the Poschl-Teller hole.
double pt_arg(const ModelSpec& spec, double x) {
    const double shift = spec.params().count("x_shift") ? spec.params().at("x_shift") : 0.0;
    return spec.param("alpha") * (x - shift);
}

// psi2 from psi1 through the first-order relation, by a five-point derivative
// of sqrt(v) psi1.
double psi2_from_psi1(const ModelSpec& spec, double E, double x, const std::function<double(double)>& psi1) {
    const Interval& dom = spec.domain();
    double h = 1e-3 * std::max(1.0, std::abs(x));
    if (dom.lo_finite()) h = std::min(h, 0.2 * (x - dom.lo));
    if (dom.hi_finite()) h = std::min(h, 0.2 * (dom.hi - x));
    const auto& v = spec.velocity();
    auto t1 = [&](double y) { return std::sqrt(v(y)) * psi1(y); };
    const double d = (t1(x - 2 * h) - 8 * t1(x - h) + 8 * t1(x + h) - t1(x + 2 * h)) / (12 * h);
    const double vx = v(x);
    const double z2 = E + product_u(spec, x).u;
    // Returns the imaginary part; psi2 = -i * (v / z2) d / sqrt(v).
    return -(vx / z2) * d / std::sqrt(vx);
}

}  // namespace

const char* to_string(Provenance p) { return p == Provenance::Verified ? "verified" : "as-published"; }

double poschl_teller_s(const ParamMap& params, SVariant variant) {
    const ModelSpec spec = builtin_model(BuiltinModel::PoschlTeller, params);
    const double a = spec.param("alpha"), v0 = spec.param("v0"), m0 = spec.param("m0");
    const double r = variant == SVariant::Verified ? m0 * m0 * v0 * v0 / (a * a) - 1.0 / 16.0
                                                   : m0 * m0 * a * a - 1.0 / 16.0;
    if (r < 0.0) {
        std::ostringstream os;
        os << "Poschl-Teller exponent s is complex (radicand " << r << ")";
        invalid(os.str());
    }
    return 0.5 + std::sqrt(r);
}

std::vector<double> poschl_teller_ladder(const ParamMap& params, int count, SVariant variant) {
    const double s = poschl_teller_s(params, variant);
    const double a = params.at("alpha"), v0 = params.at("v0");
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(a * v0 / 4.0 * std::sqrt(1.0 + 16.0 * (s + k) * (s + k)));
    return out;
}

SpectrumValue spectrum_value(BuiltinModel model, int n, const ParamMap& params, SVariant variant) {
    const ModelSpec spec = builtin_model(model, params);
    require_n(model, n);
    SpectrumValue r;
    double e = 0.0;
    switch (model) {
        case BuiltinModel::CoshSquare: {
            const double a = spec.param("alpha"), v0 = spec.param("v0"), m0 = spec.param("m0");
            const double k = n * pi * a * v0 / 2.0;
            e = std::sqrt(k * k + m0 * m0 * v0 * v0 * v0 * v0);
            r.formula = "sqrt((n pi alpha v0/2)^2 + m0^2 v0^4)";
            break;
        }
        case BuiltinModel::Rational: {
            const double a = spec.param("alpha"), v0 = spec.param("v0"), m0 = spec.param("m0");
            const double k = n * a * v0;
            e = std::sqrt(k * k + m0 * m0 * v0 * v0 * v0 * v0);
            r.formula = "sqrt((n alpha v0)^2 + m0^2 v0^4)";
            break;
        }
        case BuiltinModel::PoschlTeller: {
            const double a = spec.param("alpha"), v0 = spec.param("v0");
            const double s = poschl_teller_s(params, variant);
            e = a * v0 / 4.0 * std::sqrt(1.0 + 16.0 * (s + 2 * n) * (s + 2 * n));
            r.formula = "(alpha v0/4) sqrt(1 + 16 (s + 2n)^2)";
            r.provenance = variant == SVariant::Verified ? Provenance::Verified : Provenance::AsPublished;
            break;
        }
        case BuiltinModel::LinearSingular: {
            const double A = spec.param("A"), v0 = spec.param("v0");
            e = checked_sqrt(A * v0 * v0 * v0 * (2 * n + 1) - v0 * v0 / 16.0, "LinearSingular level");
            r.formula = "sqrt(A v0^3 (2n + 1) - v0^2/16)";
            r.provenance = Provenance::AsPublished;
            break;
        }
        case BuiltinModel::ConstantRest: {
            const double m0 = spec.param("m0"), c = spec.param("c");
            e = m0 * c * c;
            r.formula = "m0 c^2";
            break;
        }
    }
    r.plus = e;
    r.minus = -e;
    return r;
}

double normalization_constant(BuiltinModel model, int n, const ParamMap& params) {
    const ModelSpec spec = builtin_model(model, params);
    const double E = spectrum_value(model, n, params).plus;
    const double a = spec.param("alpha"), v0 = spec.param("v0");
    switch (model) {
        case BuiltinModel::CoshSquare: return std::sqrt(a * v0 / (2.0 * E));
        case BuiltinModel::Rational: return std::sqrt(a * v0 / (pi * E));
        default: invalid("closed-form normalization is only available for CoshSquare and Rational");
    }
}

double published_coshsquare_normalization(const ParamMap& params, double E) {
    const ModelSpec spec = builtin_model(BuiltinModel::CoshSquare, params);
    const double a = spec.param("alpha"), v0 = spec.param("v0"), m0 = spec.param("m0");
    const double A = m0 * v0 * v0;
    const double k = checked_sqrt(E * E - A * A, "unquantized family");
    const double z1 = E - A;
    return std::sqrt(a * v0 * k / (2.0 * (k * z1 + 2.0 * a * m0 * v0 * v0 * v0 * v0)));
}

SpinorValue bound_spinor(BuiltinModel model, int n, const ParamMap& params, double x, SVariant variant) {
    const ModelSpec spec = builtin_model(model, params);
    require_n(model, n);
    if (!spec.domain().contains(x)) {
        std::ostringstream os;
        os << "x=" << x << " is outside the model domain";
        throw Error(ErrorCode::Domain, os.str());
    }
    SpinorValue out;
    const double E = spectrum_value(model, n, params, variant).plus;
    out.energy = E;
    const double u = product_u(spec, x).u;
    const double z1 = E - u, z2 = E + u;
    switch (model) {
        case BuiltinModel::CoshSquare: {
            const double a = spec.param("alpha"), v0 = spec.param("v0");
            const double N = normalization_constant(model, n, params);
            const double sech = 1.0 / std::cosh(a * x);
            const double arg = n * pi / 2.0 * (std::tanh(a * x) + 1.0);
            out.psi1 = N * std::sqrt(z2 / v0) * sech * std::sin(arg);
            out.psi2 = {0.0, -N * std::sqrt(z1 / v0) * sech * std::cos(arg)};
            out.normalized = true;
            break;
        }
        case BuiltinModel::Rational: {
            const double a = spec.param("alpha"), v0 = spec.param("v0");
            const double N = normalization_constant(model, n, params);
            const double env = 1.0 / std::sqrt(1.0 + a * a * x * x);
            const double arg = n * (std::atan(a * x) + pi / 2.0);
            out.psi1 = N * std::sqrt(z2 / v0) * env * std::sin(arg);
            out.psi2 = {0.0, -N * std::sqrt(z1 / v0) * env * std::cos(arg)};
            out.normalized = true;
            break;
        }
        case BuiltinModel::PoschlTeller: {
            const double v0 = spec.param("v0"), m0 = spec.param("m0");
            const double s = poschl_teller_s(params, variant);
            auto psi1 = [&](double y) {
                const double sn = std::sin(pt_arg(spec, y));
                return std::sqrt(E / v0 + m0 * v0 / sn) * std::pow(sn, s) * hyp2f1_polynomial(n, s + n, s + 0.5, sn * sn);
            };
            out.psi1 = psi1(x);
            out.psi2 = {0.0, psi2_from_psi1(spec, E, x, psi1)};
            out.provenance = variant == SVariant::Verified ? Provenance::Verified : Provenance::AsPublished;
            break;
        }
        case BuiltinModel::LinearSingular: {
            const double A = spec.param("A"), v0 = spec.param("v0");
            auto psi1 = [&](double y) {
                const double l = std::log(y);
                return std::sqrt(E / (v0 * y) + A * v0) * std::exp(-A * v0 / 2.0 * l * l) * hermite(n, std::sqrt(A * v0) * l);
            };
            out.psi1 = psi1(x);
            out.psi2 = {0.0, psi2_from_psi1(spec, E, x, psi1)};
            out.provenance = Provenance::AsPublished;
            break;
        }
        case BuiltinModel::ConstantRest:
            out.psi1 = 1.0;
            out.psi2 = 0.0;
            break;
    }
    return out;
}

double hermite(int n, double y) {
    if (n < 0) invalid("Hermite degree must be >= 0");
    double h0 = 1.0;
    if (n == 0) return h0;
    double h1 = 2.0 * y;
    for (int k = 1; k < n; ++k) {
        const double h2 = 2.0 * y * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

double hyp2f1_polynomial(int n, double b, double c, double z) {
    if (n < 0) invalid("2F1 polynomial degree must be >= 0");
    if (c <= 0.0 && c == std::floor(c)) {
        std::ostringstream os;
        os << "2F1 lower parameter c=" << c << " is a pole";
        invalid(os.str());
    }
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < n; ++k) {
        term *= (k - n) * (b + k) / ((c + k) * (k + 1)) * z;
        sum += term;
    }
    return sum;
}

}  // namespace pdmdirac
